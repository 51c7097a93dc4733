// Writes a test sine (argv: path seconds frequency).

#include "support.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: make_wav out.wav seconds frequency\n";
        return 2;
    }
    mandala::write_wav(argv[1], test::sine_track(std::atof(argv[2]), std::atof(argv[3])), mandala::WavFormat::kPcm16);
    return 0;
}
