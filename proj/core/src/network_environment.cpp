#include "aptsynth/network_environment.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "aptsynth/error.hpp"

namespace aptsynth {

namespace {

std::uint64_t usable_hosts(const Ipv4Prefix& p) { return p.size() > 2 ? p.size() - 2 : p.size(); }

Ipv4 host_at(const Ipv4Prefix& p, std::uint64_t i) {
    return Ipv4{static_cast<std::uint32_t>(p.first().value + (p.size() > 2 ? i + 1 : i))};
}

bool overlaps(const Ipv4Prefix& a, const Ipv4Prefix& b) {
    const int len = std::min(a.length, b.length);
    const Ipv4Prefix shorter{Ipv4{a.network.value}, len};
    return shorter.contains(b.network) || Ipv4Prefix{b.network, len}.contains(a.network);
}

}  // namespace

std::string_view address_class_name(AddressClass c) {
    switch (c) {
        case AddressClass::campus: return "campus";
        case AddressClass::external: return "external";
        case AddressClass::blacklist: return "blacklist";
        case AddressClass::tor_exit: return "tor_exit";
        case AddressClass::cnc: return "cnc";
    }
    return {};
}

NetworkEnvironment::NetworkEnvironment(Spec spec) : spec_(std::move(spec)) {
    if (spec_.external_pool.empty()) throw ConfigError("external address pool is empty");
    for (const auto& ext : spec_.external_pool) {
        if (overlaps(ext, spec_.campus_cidr))
            throw ConfigError("external prefix " + ext.to_string() + " overlaps campus " +
                              spec_.campus_cidr.to_string());
        external_usable_ += usable_hosts(ext);
    }
    for (std::size_t i = 0; i < spec_.external_pool.size(); ++i)
        for (std::size_t j = i + 1; j < spec_.external_pool.size(); ++j)
            if (overlaps(spec_.external_pool[i], spec_.external_pool[j]))
                throw ConfigError("external prefixes overlap: " + spec_.external_pool[i].to_string());

    auto fill = [&](const std::vector<Ipv4>& list, std::unordered_set<Ipv4>& set, std::string_view what) {
        for (Ipv4 ip : list) {
            if (!in_external_space(ip))
                throw ConfigError(std::string(what) + " address " + ip.to_string() + " is not in the external pool");
            if (blacklist_.contains(ip) || tor_.contains(ip) || cnc_.contains(ip) || set.contains(ip))
                throw ConfigError(std::string(what) + " address " + ip.to_string() + " listed twice");
            set.insert(ip);
        }
    };
    fill(spec_.ip_blacklist, blacklist_, "blacklist");
    fill(spec_.tor_exit_nodes, tor_, "tor exit");
    fill(spec_.cnc_pool, cnc_, "C&C");

    const std::uint64_t special = blacklist_.size() + tor_.size() + cnc_.size();
    if (special >= external_usable_) throw ConfigError("special address lists exhaust the external pool");
}

NetworkEnvironment NetworkEnvironment::make_default(std::uint64_t seed) { return make_default(seed, 32, 16, 8); }

NetworkEnvironment NetworkEnvironment::make_default(std::uint64_t seed, int blacklist_count, int tor_count,
                                                    int cnc_count) {
    return generate(Ipv4Prefix{Ipv4{10, 20, 0, 0}, 16},
                    {Ipv4Prefix{Ipv4{203, 0, 113, 0}, 24}, Ipv4Prefix{Ipv4{198, 51, 100, 0}, 24},
                     Ipv4Prefix{Ipv4{192, 0, 2, 0}, 24}},
                    seed, blacklist_count, tor_count, cnc_count);
}

NetworkEnvironment NetworkEnvironment::generate(Ipv4Prefix campus, std::vector<Ipv4Prefix> external,
                                                std::uint64_t seed, int blacklist_count, int tor_count,
                                                int cnc_count) {
    Spec spec;
    spec.campus_cidr = campus;
    spec.external_pool = std::move(external);

    std::uint64_t total = 0;
    for (const auto& p : spec.external_pool) total += usable_hosts(p);
    if (total > (1u << 20))
        throw ConfigError("external pool too large to draw special lists from; list them explicitly");
    std::vector<Ipv4> hosts;
    for (const auto& p : spec.external_pool)
        for (std::uint64_t i = 0; i < usable_hosts(p); ++i) hosts.push_back(host_at(p, i));
    const auto needed = static_cast<std::size_t>(blacklist_count + tor_count + cnc_count);
    if (blacklist_count < 0 || tor_count < 0 || cnc_count < 0 || needed >= hosts.size())
        throw ConfigError("invalid special address counts");

    // Partial Fisher-Yates: the first `needed` entries are a uniform draw without replacement.
    Rng rng = make_stream(seed, StreamTag::environment);
    for (std::size_t i = 0; i < needed; ++i) std::swap(hosts[i], hosts[uniform_int<std::size_t>(rng, i, hosts.size() - 1)]);

    auto take = [&](std::size_t from, int count) {
        std::vector<Ipv4> out(hosts.begin() + static_cast<std::ptrdiff_t>(from),
                              hosts.begin() + static_cast<std::ptrdiff_t>(from + static_cast<std::size_t>(count)));
        std::sort(out.begin(), out.end());
        return out;
    };
    spec.ip_blacklist = take(0, blacklist_count);
    spec.tor_exit_nodes = take(static_cast<std::size_t>(blacklist_count), tor_count);
    spec.cnc_pool = take(static_cast<std::size_t>(blacklist_count + tor_count), cnc_count);
    return NetworkEnvironment(std::move(spec));
}

bool NetworkEnvironment::in_external_space(Ipv4 ip) const {
    return std::any_of(spec_.external_pool.begin(), spec_.external_pool.end(),
                       [&](const Ipv4Prefix& p) { return p.contains(ip); });
}

AddressClass NetworkEnvironment::classify(Ipv4 ip) const {
    if (spec_.campus_cidr.contains(ip)) return AddressClass::campus;
    if (blacklist_.contains(ip)) return AddressClass::blacklist;
    if (tor_.contains(ip)) return AddressClass::tor_exit;
    if (cnc_.contains(ip)) return AddressClass::cnc;
    return AddressClass::external;
}

std::uint64_t NetworkEnvironment::campus_host_count() const { return usable_hosts(spec_.campus_cidr); }

Ipv4 NetworkEnvironment::sample(AddressClass cls, Rng& rng) const {
    auto pick = [&](const std::vector<Ipv4>& list, std::string_view what) {
        if (list.empty()) throw ConfigError("cannot sample from empty " + std::string(what) + " list");
        return list[uniform_int<std::size_t>(rng, 0, list.size() - 1)];
    };
    switch (cls) {
        case AddressClass::campus:
            return host_at(spec_.campus_cidr, uniform_int<std::uint64_t>(rng, 0, campus_host_count() - 1));
        case AddressClass::blacklist: return pick(spec_.ip_blacklist, "blacklist");
        case AddressClass::tor_exit: return pick(spec_.tor_exit_nodes, "tor exit");
        case AddressClass::cnc: return pick(spec_.cnc_pool, "C&C");
        case AddressClass::external:
            for (;;) {
                std::uint64_t i = uniform_int<std::uint64_t>(rng, 0, external_usable_ - 1);
                for (const auto& p : spec_.external_pool) {
                    if (i < usable_hosts(p)) {
                        const Ipv4 ip = host_at(p, i);
                        if (classify(ip) == AddressClass::external) return ip;
                        break;
                    }
                    i -= usable_hosts(p);
                }
            }
    }
    throw ConfigError("unknown address class");
}

Ipv4 NetworkEnvironment::sample_campus_except(Ipv4 avoid, Rng& rng) const {
    if (campus_host_count() < 2) throw ConfigError("campus network has fewer than two hosts");
    for (;;) {
        const Ipv4 ip = sample(AddressClass::campus, rng);
        if (ip != avoid) return ip;
    }
}

std::vector<Ipv4> load_address_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open address list " + path.string());
    std::vector<Ipv4> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        auto ip = Ipv4::parse(std::string_view(line).substr(b, e - b + 1));
        if (!ip) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad IPv4 address");
        out.push_back(*ip);
    }
    return out;
}

}  // namespace aptsynth
