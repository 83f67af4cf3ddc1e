#include "aptsynth/ipv4.hpp"

#include <charconv>

namespace aptsynth {

std::string Ipv4::to_string() const {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((value >> shift) & 0xffu);
        if (shift) out += '.';
    }
    return out;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
    std::uint32_t acc = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        unsigned v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || next == p || v > 255 || next - p > 3) return std::nullopt;
        acc = (acc << 8) | v;
        p = next;
    }
    if (p != end) return std::nullopt;
    return Ipv4{acc};
}

std::string Ipv4Prefix::to_string() const { return network.to_string() + "/" + std::to_string(length); }

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto ip = Ipv4::parse(text.substr(0, slash));
    if (!ip) return std::nullopt;
    int len = -1;
    const auto tail = text.substr(slash + 1);
    auto [next, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
    if (ec != std::errc{} || next != tail.data() + tail.size() || len < 0 || len > 32) return std::nullopt;
    Ipv4Prefix prefix{*ip, len};
    if ((ip->value & ~prefix.mask()) != 0) return std::nullopt;
    return prefix;
}

}  // namespace aptsynth
