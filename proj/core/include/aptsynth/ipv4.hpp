#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace aptsynth {

// IPv4 address held in host byte order.
struct Ipv4 {
    std::uint32_t value = 0;

    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) |
                std::uint32_t{d}) {}

    std::string to_string() const;
    static std::optional<Ipv4> parse(std::string_view text);

    friend constexpr auto operator<=>(Ipv4, Ipv4) = default;
};

struct Ipv4Prefix {
    Ipv4 network;
    int length = 32;

    constexpr std::uint32_t mask() const {
        return length == 0 ? 0u : (~std::uint32_t{0} << (32 - length));
    }
    constexpr bool contains(Ipv4 ip) const { return (ip.value & mask()) == (network.value & mask()); }
    constexpr std::uint64_t size() const { return std::uint64_t{1} << (32 - length); }
    constexpr Ipv4 first() const { return Ipv4{network.value & mask()}; }

    std::string to_string() const;
    // "a.b.c.d/len"; host bits must be zero.
    static std::optional<Ipv4Prefix> parse(std::string_view text);

    friend constexpr bool operator==(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

}  // namespace aptsynth

template <>
struct std::hash<aptsynth::Ipv4> {
    std::size_t operator()(aptsynth::Ipv4 ip) const noexcept { return std::hash<std::uint32_t>{}(ip.value); }
};
