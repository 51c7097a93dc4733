#include "mandala/osc.hpp"

#include <bit>
#include <cstring>

namespace mandala::osc {

namespace {

std::size_t padded(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
    const std::size_t total = padded(s.size() + 1);
    out.insert(out.end(), total - s.size(), std::uint8_t{0});
}

bool valid_address(std::string_view a) {
    if (a.empty() || a.front() != '/') return false;
    for (unsigned char c : a) {
        if (c == 0 || c > 0x7F) return false;
    }
    return true;
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
           (static_cast<std::uint32_t>(b[at + 2]) << 8) | static_cast<std::uint32_t>(b[at + 3]);
}

class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return at_; }
    bool done() const { return at_ == bytes_.size(); }

    // Reads a null-terminated, zero-padded string.
    std::optional<DecodeErrc> string(std::string& out) {
        const auto* begin = bytes_.data() + at_;
        const auto* nul = static_cast<const std::uint8_t*>(
            std::memchr(begin, 0, bytes_.size() - at_));
        if (nul == nullptr) return DecodeErrc::kUnterminatedString;
        const std::size_t len = static_cast<std::size_t>(nul - begin);
        const std::size_t end = at_ + padded(len + 1);
        if (end > bytes_.size()) return DecodeErrc::kBadPadding;
        for (std::size_t i = at_ + len; i < end; ++i) {
            if (bytes_[i] != 0) return DecodeErrc::kBadPadding;
        }
        out.assign(reinterpret_cast<const char*>(begin), len);
        at_ = end;
        return std::nullopt;
    }

    std::optional<DecodeErrc> word(std::uint32_t& out) {
        if (bytes_.size() - at_ < 4) return DecodeErrc::kTruncatedArgument;
        out = get_u32(bytes_, at_);
        at_ += 4;
        return std::nullopt;
    }

    std::optional<DecodeErrc> blob(Blob& out) {
        std::uint32_t size = 0;
        if (auto e = word(size)) return e;
        const auto n = static_cast<std::int32_t>(size);
        if (n < 0 || static_cast<std::size_t>(n) > bytes_.size() - at_) {
            return DecodeErrc::kTruncatedArgument;
        }
        const std::size_t end = at_ + padded(static_cast<std::size_t>(n));
        if (end > bytes_.size()) return DecodeErrc::kBadPadding;
        for (std::size_t i = at_ + static_cast<std::size_t>(n); i < end; ++i) {
            if (bytes_[i] != 0) return DecodeErrc::kBadPadding;
        }
        out.assign(bytes_.begin() + static_cast<long>(at_), bytes_.begin() + static_cast<long>(at_) + n);
        at_ = end;
        return std::nullopt;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t at_ = 0;
};

DecodeResult fail(DecodeErrc code, std::size_t offset) {
    DecodeResult r;
    r.error = {code, offset};
    return r;
}

}  // namespace

char type_tag(const Arg& arg) {
    constexpr char tags[] = {'i', 'f', 's', 'b'};
    return tags[arg.index()];
}

std::vector<std::uint8_t> encode(const Message& msg) {
    if (!valid_address(msg.address)) {
        throw EncodeError("OSC address must be non-empty ASCII starting with '/': " + msg.address);
    }
    std::vector<std::uint8_t> out;
    put_string(out, msg.address);

    std::string tags = ",";
    for (const auto& a : msg.args) tags.push_back(type_tag(a));
    put_string(out, tags);

    for (const auto& a : msg.args) {
        if (const auto* i = std::get_if<std::int32_t>(&a)) {
            put_u32(out, static_cast<std::uint32_t>(*i));
        } else if (const auto* f = std::get_if<float>(&a)) {
            put_u32(out, std::bit_cast<std::uint32_t>(*f));
        } else if (const auto* s = std::get_if<std::string>(&a)) {
            if (s->find('\0') != std::string::npos) throw EncodeError("OSC string argument contains NUL");
            put_string(out, *s);
        } else {
            const auto& blob = std::get<Blob>(a);
            if (blob.size() > 0x7FFFFFFF) throw EncodeError("OSC blob too large");
            put_u32(out, static_cast<std::uint32_t>(blob.size()));
            out.insert(out.end(), blob.begin(), blob.end());
            out.insert(out.end(), padded(blob.size()) - blob.size(), std::uint8_t{0});
        }
    }
    return out;
}

DecodeResult try_decode(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) return fail(DecodeErrc::kEmpty, 0);
    if (bytes.size() % 4 != 0) return fail(DecodeErrc::kMisaligned, bytes.size());

    Cursor cur(bytes);
    Message msg;
    if (auto e = cur.string(msg.address)) return fail(*e, cur.offset());
    if (!valid_address(msg.address)) return fail(DecodeErrc::kBadAddress, 0);

    if (cur.done()) return fail(DecodeErrc::kMissingTypeTags, cur.offset());
    const std::size_t tags_at = cur.offset();
    if (bytes[tags_at] != ',') return fail(DecodeErrc::kMissingTypeTags, tags_at);
    std::string tags;
    if (auto e = cur.string(tags)) return fail(*e, cur.offset());

    msg.args.reserve(tags.size() - 1);
    for (std::size_t k = 1; k < tags.size(); ++k) {
        const std::size_t at = cur.offset();
        switch (tags[k]) {
            case 'i': {
                std::uint32_t w = 0;
                if (auto e = cur.word(w)) return fail(*e, at);
                msg.args.emplace_back(static_cast<std::int32_t>(w));
                break;
            }
            case 'f': {
                std::uint32_t w = 0;
                if (auto e = cur.word(w)) return fail(*e, at);
                msg.args.emplace_back(std::bit_cast<float>(w));
                break;
            }
            case 's': {
                if (cur.done()) return fail(DecodeErrc::kTruncatedArgument, at);
                std::string s;
                if (auto e = cur.string(s)) return fail(*e, at);
                msg.args.emplace_back(std::move(s));
                break;
            }
            case 'b': {
                Blob b;
                if (auto e = cur.blob(b)) return fail(*e, at);
                msg.args.emplace_back(std::move(b));
                break;
            }
            default:
                return fail(DecodeErrc::kUnknownTypeTag, tags_at + k);
        }
    }
    if (!cur.done()) return fail(DecodeErrc::kTrailingBytes, cur.offset());

    DecodeResult ok;
    ok.message = std::move(msg);
    return ok;
}

const char* to_string(DecodeErrc errc) {
    switch (errc) {
        case DecodeErrc::kEmpty: return "empty packet";
        case DecodeErrc::kMisaligned: return "length not a multiple of 4";
        case DecodeErrc::kBadAddress: return "invalid address pattern";
        case DecodeErrc::kUnterminatedString: return "unterminated string";
        case DecodeErrc::kBadPadding: return "bad padding";
        case DecodeErrc::kMissingTypeTags: return "missing type tag string";
        case DecodeErrc::kUnknownTypeTag: return "unsupported type tag";
        case DecodeErrc::kTruncatedArgument: return "truncated argument";
        case DecodeErrc::kTrailingBytes: return "trailing bytes after arguments";
    }
    return "unknown error";
}

DecodeException::DecodeException(DecodeError e)
    : std::runtime_error(std::string("OSC decode error at byte ") + std::to_string(e.offset) + ": " +
                         to_string(e.code)),
      error(e) {}

Message decode(std::span<const std::uint8_t> bytes) {
    auto r = try_decode(bytes);
    if (!r) throw DecodeException(r.error);
    return std::move(*r.message);
}

}  // namespace mandala::osc
