#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "aptsynth/ipv4.hpp"
#include "aptsynth/rng.hpp"

namespace aptsynth {

enum class AddressClass : std::uint8_t { campus, external, blacklist, tor_exit, cnc };

std::string_view address_class_name(AddressClass c);

// Monitored campus space plus the external pools alerts point at. Read-only
// after construction.
class NetworkEnvironment {
public:
    struct Spec {
        Ipv4Prefix campus_cidr;
        std::vector<Ipv4Prefix> external_pool;
        std::vector<Ipv4> ip_blacklist;
        std::vector<Ipv4> tor_exit_nodes;
        std::vector<Ipv4> cnc_pool;
    };

    // Validates disjointness and membership of the special lists in the external
    // space; throws ConfigError otherwise. Empty special lists are accepted here
    // and reported only when sampled from.
    explicit NetworkEnvironment(Spec spec);

    // 10.20.0.0/16 campus, documentation /24s as external space; 32 blacklist,
    // 16 Tor exit and 8 C&C addresses drawn from the external pool by `seed`.
    static NetworkEnvironment make_default(std::uint64_t seed);
    static NetworkEnvironment make_default(std::uint64_t seed, int blacklist_count, int tor_count, int cnc_count);
    // Same draw over arbitrary campus and external prefixes.
    static NetworkEnvironment generate(Ipv4Prefix campus, std::vector<Ipv4Prefix> external, std::uint64_t seed,
                                       int blacklist_count, int tor_count, int cnc_count);

    AddressClass classify(Ipv4 ip) const;
    // Uniform over the addresses of `cls`. Campus and external sampling exclude
    // the all-zeros and all-ones host of each prefix. Throws ConfigError on an
    // empty pool.
    Ipv4 sample(AddressClass cls, Rng& rng) const;
    // Campus host different from `avoid`.
    Ipv4 sample_campus_except(Ipv4 avoid, Rng& rng) const;

    const Spec& spec() const { return spec_; }
    const Ipv4Prefix& campus() const { return spec_.campus_cidr; }
    std::uint64_t campus_host_count() const;

private:
    bool in_external_space(Ipv4 ip) const;

    Spec spec_;
    std::unordered_set<Ipv4> blacklist_;
    std::unordered_set<Ipv4> tor_;
    std::unordered_set<Ipv4> cnc_;
    std::uint64_t external_usable_ = 0;
};

// Free-function forms used throughout the generators.
inline AddressClass classify_ip(Ipv4 ip, const NetworkEnvironment& env) { return env.classify(ip); }
inline Ipv4 sample_ip(AddressClass cls, const NetworkEnvironment& env, Rng& rng) { return env.sample(cls, rng); }

// One address per line; blank lines and '#' comments ignored.
std::vector<Ipv4> load_address_list(const std::filesystem::path& path);

}  // namespace aptsynth
