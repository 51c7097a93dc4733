#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mandala {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws if absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Plain comma-separated values, first line is the header. No quoting.
CsvTable read_csv(std::istream& in);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace mandala
