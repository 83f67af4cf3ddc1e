#include "aptsynth/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "aptsynth/error.hpp"
#include "aptsynth/parallel.hpp"

namespace aptsynth {

namespace {

constexpr double kTieEpsilon = 1e-12;

struct DuplicateKey {
    AlertType type;
    Ipv4 src;
    Ipv4 dst;
    friend bool operator==(const DuplicateKey&, const DuplicateKey&) = default;
};

struct DuplicateKeyHash {
    std::size_t operator()(const DuplicateKey& k) const noexcept {
        const std::uint64_t packed = (std::uint64_t{k.src.value} << 32) | k.dst.value;
        return static_cast<std::size_t>(mix_hash(packed ^ (std::uint64_t(index_of(k.type)) << 59)));
    }
    static std::uint64_t mix_hash(std::uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdull;
        x ^= x >> 33;
        return x;
    }
};

bool earlier(const Alert& a, const Alert& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
}

double normalise_time(EpochSeconds t, TimeRange window) {
    if (window.end <= window.begin) return 0.0;
    return static_cast<double>(t - window.begin) / static_cast<double>(window.end - window.begin);
}

std::size_t pair_count(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

// Offending members (local positions) of a candidate cluster, empty when valid.
// Rule checks only; avgSim is handled by the caller.
std::vector<std::size_t> rule_offenders(std::span<const Alert* const> members, const StepMapping& mapping,
                                        DurationSeconds delta_t) {
    const std::size_t m = members.size();
    std::vector<bool> bad(m, false);
    std::array<int, kStepCount> step_count{};
    std::array<int, kAlertTypeCount> type_count{};
    EpochSeconds lo = members[0]->timestamp, hi = members[0]->timestamp;
    for (const Alert* a : members) {
        ++step_count[index_of(mapping.step_of(a->alert_type))];
        ++type_count[index_of(a->alert_type)];
        lo = std::min(lo, a->timestamp);
        hi = std::max(hi, a->timestamp);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const Alert& a = *members[i];
        if (step_count[index_of(mapping.step_of(a.alert_type))] > 1) bad[i] = true;
        if (type_count[index_of(a.alert_type)] > 1) bad[i] = true;
        if (hi - lo > delta_t && (a.timestamp == lo || a.timestamp == hi)) bad[i] = true;
    }
    // Lifecycle order: a later step must carry a strictly later timestamp.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto si = mapping.step_of(members[i]->alert_type);
            const auto sj = mapping.step_of(members[j]->alert_type);
            if (si == sj) continue;
            const Alert& first = si < sj ? *members[i] : *members[j];
            const Alert& second = si < sj ? *members[j] : *members[i];
            if (second.timestamp <= first.timestamp) bad[i] = bad[j] = true;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m; ++i)
        if (bad[i]) out.push_back(i);
    return out;
}

std::vector<const Alert*> resolve(const std::vector<std::uint64_t>& ids, const AlertIndex& index) {
    std::vector<const Alert*> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(&index.at(id));
    return out;
}

std::vector<std::uint64_t> sorted_ids(std::vector<const Alert*> members) {
    std::sort(members.begin(), members.end(), [](const Alert* a, const Alert* b) { return earlier(*a, *b); });
    std::vector<std::uint64_t> ids;
    ids.reserve(members.size());
    for (const Alert* a : members) ids.push_back(a->alert_id);
    return ids;
}

bool cluster_valid(std::span<const Alert* const> members, const CorrelationParams& p, const StepMapping& mapping) {
    if (members.size() < 2) return false;
    if (!rule_offenders(members, mapping, p.delta_t).empty()) return false;
    return average_similarity(members, p) >= p.tau;
}

// ---------------------------------------------------------------------------
// Window clustering internals
// ---------------------------------------------------------------------------

class WindowClusterer {
public:
    WindowClusterer(std::span<const Alert> alerts, TimeRange window, const CorrelationParams& p,
                    const StepMapping& mapping)
        : alerts_(alerts), window_(window), p_(p), mapping_(mapping) {
        feats_.reserve(alerts.size());
        for (const Alert& a : alerts) feats_.push_back(compact_features(a, window, p.weights));
    }

    std::vector<std::vector<std::size_t>> run() {
        build_neighbours();
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::size_t> all(alerts_.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (auto& comp : components(all)) repair(std::move(comp), out);
        return out;
    }

    double sim(std::size_t i, std::size_t j) const {
        if (std::llabs(alerts_[i].timestamp - alerts_[j].timestamp) > p_.delta_t) return 0.0;
        return compact_similarity(feats_[i], feats_[j], p_.weights);
    }

    double mean_similarity(const std::vector<std::size_t>& members) const {
        if (members.size() < 2) return 0.0;
        double total = 0.0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) total += sim(members[a], members[b]);
        return total / static_cast<double>(pair_count(members.size()));
    }

private:
    void build_neighbours() {
        const std::size_t n = alerts_.size();
        neighbours_.assign(n, {});
        const int k = k_for_window(alerts_, p_);
        if (n < 2 || k < 1) return;

        const bool by_host = p_.tau >= max_cross_host_similarity(p_.weights);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (by_host && alerts_[a].src_ip != alerts_[b].src_ip) return alerts_[a].src_ip < alerts_[b].src_ip;
            return earlier(alerts_[a], alerts_[b]);
        });

        struct Candidate {
            double s;
            std::uint64_t id;
            std::size_t idx;
        };
        std::vector<Candidate> cands;
        for (std::size_t g = 0; g < n;) {
            std::size_t end = g + 1;
            if (by_host)
                while (end < n && alerts_[order[end]].src_ip == alerts_[order[g]].src_ip) ++end;
            else
                end = n;
            for (std::size_t x = g; x < end; ++x) {
                const std::size_t i = order[x];
                cands.clear();
                for (std::size_t y = g; y < end; ++y) {
                    if (y == x) continue;
                    const std::size_t j = order[y];
                    const double s = sim(i, j);
                    if (s > p_.tau) cands.push_back({s, alerts_[j].alert_id, j});
                }
                const auto keep = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(k));
                std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                                  [](const Candidate& a, const Candidate& b) {
                                      return a.s != b.s ? a.s > b.s : a.id < b.id;
                                  });
                for (std::size_t c = 0; c < keep; ++c) neighbours_[i].push_back(cands[c].idx);
            }
            g = end;
        }
    }

    bool mutual(std::size_t i, std::size_t j) const {
        const auto& ni = neighbours_[i];
        const auto& nj = neighbours_[j];
        return std::find(ni.begin(), ni.end(), j) != ni.end() && std::find(nj.begin(), nj.end(), i) != nj.end();
    }

    // Connected components of the mutual-kNN graph induced on `subset`,
    // ordered by their earliest member.
    std::vector<std::vector<std::size_t>> components(const std::vector<std::size_t>& subset) const {
        std::unordered_map<std::size_t, std::size_t> local;
        for (std::size_t x = 0; x < subset.size(); ++x) local.emplace(subset[x], x);
        std::vector<std::size_t> parent(subset.size());
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t x = 0; x < subset.size(); ++x) {
            for (std::size_t j : neighbours_[subset[x]]) {
                auto it = local.find(j);
                if (it == local.end() || !mutual(subset[x], j)) continue;
                const auto a = find(x), b = find(it->second);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
        std::unordered_map<std::size_t, std::vector<std::size_t>> groups;
        for (std::size_t x = 0; x < subset.size(); ++x) groups[find(x)].push_back(subset[x]);
        std::vector<std::vector<std::size_t>> out;
        for (auto& [root, members] : groups)
            if (members.size() >= 2) out.push_back(std::move(members));
        for (auto& c : out)
            std::sort(c.begin(), c.end(), [&](std::size_t a, std::size_t b) { return earlier(alerts_[a], alerts_[b]); });
        std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
            return earlier(alerts_[a.front()], alerts_[b.front()]);
        });
        return out;
    }

    std::vector<std::size_t> offenders(const std::vector<std::size_t>& work, double mean) const {
        std::vector<const Alert*> members;
        members.reserve(work.size());
        for (auto i : work) members.push_back(&alerts_[i]);
        auto bad = rule_offenders(members, mapping_, p_.delta_t);
        if (bad.empty() && mean < p_.tau) {
            bad.resize(work.size());
            std::iota(bad.begin(), bad.end(), std::size_t{0});
        }
        return bad;
    }

    // Drops offenders one at a time, always the one whose removal leaves the
    // highest mean similarity (ties: latest timestamp, then highest id). The
    // dropped alerts are clustered again among themselves.
    void repair(std::vector<std::size_t> work, std::vector<std::vector<std::size_t>>& out) const {
        std::vector<std::size_t> dropped;
        std::vector<double> row(work.size(), 0.0);
        double total = 0.0;
        for (std::size_t a = 0; a < work.size(); ++a)
            for (std::size_t b = a + 1; b < work.size(); ++b) {
                const double s = sim(work[a], work[b]);
                row[a] += s;
                row[b] += s;
                total += s;
            }

        while (work.size() >= 2) {
            const double mean = total / static_cast<double>(pair_count(work.size()));
            const auto bad = offenders(work, mean);
            if (bad.empty()) break;

            const std::size_t rest_pairs = pair_count(work.size() - 1);
            std::size_t pick = bad.front();
            double best = -1.0;
            for (std::size_t pos : bad) {
                const double rest = rest_pairs ? (total - row[pos]) / static_cast<double>(rest_pairs) : 0.0;
                const bool tie = std::fabs(rest - best) <= kTieEpsilon;
                if (best < 0.0 || (!tie && rest > best) || (tie && earlier(alerts_[work[pick]], alerts_[work[pos]]))) {
                    if (!tie || best < 0.0) best = rest;
                    pick = pos;
                }
            }
            for (std::size_t x = 0; x < work.size(); ++x) row[x] -= (x == pick) ? 0.0 : sim(work[x], work[pick]);
            total -= row[pick];
            dropped.push_back(work[pick]);
            work.erase(work.begin() + static_cast<std::ptrdiff_t>(pick));
            row.erase(row.begin() + static_cast<std::ptrdiff_t>(pick));
        }

        // The alert left over when a component shrinks to one stays unclustered;
        // recursing only on the dropped ones guarantees progress.
        if (work.size() >= 2) out.push_back(std::move(work));

        if (dropped.size() >= 2)
            for (auto& comp : components(dropped)) repair(std::move(comp), out);
    }

    std::span<const Alert> alerts_;
    TimeRange window_;
    const CorrelationParams& p_;
    const StepMapping& mapping_;
    std::vector<CompactFeature> feats_;
    std::vector<std::vector<std::size_t>> neighbours_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Labels / params
// ---------------------------------------------------------------------------

std::string_view label_name(ScenarioLabel l) {
    switch (l) {
        case ScenarioLabel::non_apt: return "Non-APT";
        case ScenarioLabel::two_steps: return "APT_sub_scenario_two_steps";
        case ScenarioLabel::three_steps: return "APT_sub_scenario_three_steps";
        case ScenarioLabel::full: return "APT_full_scenario";
    }
    return {};
}

std::optional<ScenarioLabel> parse_label(std::string_view text) {
    for (auto l : {ScenarioLabel::non_apt, ScenarioLabel::two_steps, ScenarioLabel::three_steps, ScenarioLabel::full})
        if (label_name(l) == text) return l;
    return std::nullopt;
}

ScenarioLabel label_for(int corr_final) {
    if (corr_final <= 0) return ScenarioLabel::non_apt;
    if (corr_final == 1) return ScenarioLabel::two_steps;
    if (corr_final == 2) return ScenarioLabel::three_steps;
    return ScenarioLabel::full;
}

std::string_view mode_name(CorrelationMode m) { return m == CorrelationMode::strict ? "strict" : "extended"; }

std::optional<CorrelationMode> parse_mode(std::string_view text) {
    if (text == "strict") return CorrelationMode::strict;
    if (text == "extended") return CorrelationMode::extended;
    return std::nullopt;
}

double max_cross_host_similarity(const FeatureWeights& w) {
    const double src2 = w.src * w.src;
    const double all = src2 + w.type * w.type + w.dst * w.dst + w.proto * w.proto + w.severity * w.severity +
                       w.timestamp * w.timestamp;
    if (all <= 0.0) return 0.0;
    return 1.0 - src2 / all;
}

void validate(const CorrelationParams& p) {
    if (!(p.tau >= 0.0 && p.tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
    if (p.delta_t <= 0) throw ConfigError("delta_t must be positive");
    if (p.slide <= 0 || p.slide > p.delta_t) throw ConfigError("slide must lie in (0, delta_t]");
    if (p.k_cap < 1) throw ConfigError("k_cap must be at least 1");
    if (p.k_override < 0) throw ConfigError("k_override must be non-negative");
    for (double v : {p.weights.type, p.weights.src, p.weights.dst, p.weights.proto, p.weights.severity,
                     p.weights.timestamp})
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("feature weights must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

HostVocabulary::HostVocabulary(std::span<const Alert> alerts) {
    for (const Alert& a : alerts) {
        src_.push_back(a.src_ip);
        dst_.push_back(a.dest_ip);
    }
    for (auto* v : {&src_, &dst_}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
}

std::optional<std::size_t> HostVocabulary::src_index(Ipv4 ip) const {
    auto it = std::lower_bound(src_.begin(), src_.end(), ip);
    if (it == src_.end() || *it != ip) return std::nullopt;
    return static_cast<std::size_t>(it - src_.begin());
}

std::optional<std::size_t> HostVocabulary::dst_index(Ipv4 ip) const {
    auto it = std::lower_bound(dst_.begin(), dst_.end(), ip);
    if (it == dst_.end() || *it != ip) return std::nullopt;
    return static_cast<std::size_t>(it - dst_.begin());
}

std::size_t feature_length(const HostVocabulary& vocab) {
    return kAlertTypeCount + vocab.src_size() + vocab.dst_size() + kProtocolCount + 2;
}

FeatureVector encode_features(const Alert& a, TimeRange window, const HostVocabulary& vocab, const FeatureWeights& w) {
    if (!window.contains(a.timestamp))
        throw ContractViolation("alert " + std::to_string(a.alert_id) + " lies outside the encoding window");
    const auto src = vocab.src_index(a.src_ip);
    const auto dst = vocab.dst_index(a.dest_ip);
    if (!src || !dst) throw ContractViolation("alert host missing from vocabulary");

    FeatureVector f;
    f.values.assign(feature_length(vocab), 0.0);
    std::size_t base = 0;
    f.values[base + index_of(a.alert_type)] = w.type;
    base += kAlertTypeCount;
    f.values[base + *src] = w.src;
    base += vocab.src_size();
    f.values[base + *dst] = w.dst;
    base += vocab.dst_size();
    f.values[base + index_of(a.protocol())] = w.proto;
    base += kProtocolCount;
    f.values[base] = w.severity * (a.severity() / 5.0);
    f.values[base + 1] = w.timestamp * normalise_time(a.timestamp, window);
    return f;
}

double similarity(const FeatureVector& f1, const FeatureVector& f2, EpochSeconds t1, EpochSeconds t2,
                  DurationSeconds delta_t) {
    if (f1.values.size() != f2.values.size()) throw ContractViolation("feature vectors differ in length");
    if (std::llabs(t1 - t2) > delta_t) return 0.0;
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < f1.values.size(); ++i) {
        dot += f1.values[i] * f2.values[i];
        n1 += f1.values[i] * f1.values[i];
        n2 += f2.values[i] * f2.values[i];
    }
    if (n1 <= 0.0 || n2 <= 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(n1 * n2), 0.0, 1.0);
}

CompactFeature compact_features(const Alert& a, TimeRange window, const FeatureWeights& w) {
    CompactFeature f{a.alert_type, a.src_ip, a.dest_ip, a.protocol(), a.severity() / 5.0,
                     normalise_time(a.timestamp, window), 0.0};
    f.norm = std::sqrt(w.type * w.type + w.src * w.src + w.dst * w.dst + w.proto * w.proto +
                       w.severity * w.severity * f.severity * f.severity +
                       w.timestamp * w.timestamp * f.timestamp * f.timestamp);
    return f;
}

double compact_similarity(const CompactFeature& a, const CompactFeature& b, const FeatureWeights& w) {
    if (a.norm <= 0.0 || b.norm <= 0.0) return 0.0;
    double dot = w.severity * w.severity * a.severity * b.severity + w.timestamp * w.timestamp * a.timestamp * b.timestamp;
    if (a.type == b.type) dot += w.type * w.type;
    if (a.src == b.src) dot += w.src * w.src;
    if (a.dst == b.dst) dot += w.dst * w.dst;
    if (a.proto == b.proto) dot += w.proto * w.proto;
    return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Cluster helpers
// ---------------------------------------------------------------------------

AlertIndex::AlertIndex(std::span<const Alert> alerts) : alerts_(alerts) {
    by_id_.reserve(alerts.size());
    for (std::size_t i = 0; i < alerts.size(); ++i)
        if (!by_id_.emplace(alerts[i].alert_id, i).second)
            throw ContractViolation("duplicate alert id " + std::to_string(alerts[i].alert_id));
}

const Alert& AlertIndex::at(std::uint64_t alert_id) const {
    auto it = by_id_.find(alert_id);
    if (it == by_id_.end()) throw ContractViolation("unknown alert id " + std::to_string(alert_id));
    return alerts_[it->second];
}

std::vector<std::string> cluster_rule_violations(std::span<const Alert* const> members, const StepMapping& mapping,
                                                 DurationSeconds delta_t) {
    std::vector<std::string> out;
    if (members.size() < 2) {
        out.push_back("cluster has fewer than two alerts");
        return out;
    }
    std::array<int, kStepCount> steps{};
    std::array<int, kAlertTypeCount> types{};
    EpochSeconds lo = members[0]->timestamp, hi = lo;
    for (const Alert* a : members) {
        ++steps[index_of(mapping.step_of(a->alert_type))];
        ++types[index_of(a->alert_type)];
        lo = std::min(lo, a->timestamp);
        hi = std::max(hi, a->timestamp);
    }
    for (auto s : kAllSteps)
        if (steps[index_of(s)] > 1) out.push_back(std::string("step ") + step_letter(s) + " appears more than once");
    for (std::size_t t = 0; t < kAlertTypeCount; ++t)
        if (types[t] > 1) out.push_back(std::string(alert_type_name(alert_type_at(t))) + " appears more than once");
    if (hi - lo > delta_t) out.push_back("cluster spans more than delta_t");
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < members.size(); ++j) {
            const auto si = mapping.step_of(members[i]->alert_type);
            const auto sj = mapping.step_of(members[j]->alert_type);
            if (si < sj && members[j]->timestamp <= members[i]->timestamp)
                out.push_back(std::string("step ") + step_letter(sj) + " does not follow step " + step_letter(si));
        }
    return out;
}

double average_similarity(std::span<const Alert* const> members, const CorrelationParams& p) {
    if (members.size() < 2) return 0.0;
    EpochSeconds lo = members[0]->timestamp;
    for (const Alert* a : members) lo = std::min(lo, a->timestamp);
    const TimeRange window{lo, lo + p.delta_t};
    std::vector<CompactFeature> f;
    f.reserve(members.size());
    for (const Alert* a : members) f.push_back(compact_features(*a, window, p.weights));
    double total = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            if (std::llabs(members[i]->timestamp - members[j]->timestamp) <= p.delta_t)
                total += compact_similarity(f[i], f[j], p.weights);
    return total / static_cast<double>(pair_count(members.size()));
}

std::vector<Alert> filter_duplicates(std::span<const Alert> alerts, DurationSeconds delta_t) {
    std::vector<Alert> out;
    out.reserve(alerts.size());
    std::unordered_map<DuplicateKey, EpochSeconds, DuplicateKeyHash> last_kept;
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        const Alert& a = alerts[i];
        if (i && a.timestamp < alerts[i - 1].timestamp)
            throw ContractViolation("filter_duplicates requires time-sorted input");
        const DuplicateKey key{a.alert_type, a.src_ip, a.dest_ip};
        auto it = last_kept.find(key);
        if (it != last_kept.end() && a.timestamp - it->second <= delta_t) continue;
        last_kept[key] = a.timestamp;
        out.push_back(a);
    }
    return out;
}

int k_for_window(std::span<const Alert> alerts, const CorrelationParams& p) {
    const int n = static_cast<int>(alerts.size());
    if (n < 2) return 0;
    if (p.k_override > 0) return std::min(p.k_override, n - 1);
    std::array<bool, kAlertTypeCount> seen{};
    int distinct = 0;
    for (const Alert& a : alerts)
        if (!seen[index_of(a.alert_type)]) {
            seen[index_of(a.alert_type)] = true;
            ++distinct;
        }
    return std::min({distinct, p.k_cap, static_cast<int>(kAlertTypeCount), n - 1});
}

std::vector<Cluster> cluster_window(std::span<const Alert> alerts, TimeRange window, const CorrelationParams& p,
                                    const StepMapping& mapping, int window_index) {
    for (const Alert& a : alerts)
        if (!window.contains(a.timestamp))
            throw ContractViolation("alert " + std::to_string(a.alert_id) + " lies outside its window");
    if (alerts.size() < 2) return {};

    WindowClusterer clusterer(alerts, window, p, mapping);
    auto groups = clusterer.run();

    std::vector<Cluster> out;
    out.reserve(groups.size());
    for (auto& g : groups) {
        Cluster c;
        c.window_index = window_index;
        c.avg_similarity = clusterer.mean_similarity(g);
        std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return earlier(alerts[a], alerts[b]); });
        for (auto i : g) c.alert_ids.push_back(alerts[i].alert_id);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [&](const Cluster& a, const Cluster& b) {
        // Members are time-ordered, so the first id identifies the earliest alert.
        return std::tie(a.alert_ids.front(), a.alert_ids.back()) < std::tie(b.alert_ids.front(), b.alert_ids.back());
    });
    // Order by earliest member timestamp rather than id.
    AlertIndex index(alerts);
    std::stable_sort(out.begin(), out.end(), [&](const Cluster& a, const Cluster& b) {
        return earlier(index.at(a.alert_ids.front()), index.at(b.alert_ids.front()));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Merging
// ---------------------------------------------------------------------------

std::vector<Cluster> MergeOutcome::all() const {
    std::vector<Cluster> out = retired;
    out.insert(out.end(), carried.begin(), carried.end());
    return out;
}

MergeOutcome merge_adjacent(const std::vector<Cluster>& earlier_clusters, const std::vector<Cluster>& later,
                            const AlertIndex& index, const CorrelationParams& p, const StepMapping& mapping) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> owner;
    for (std::size_t e = 0; e < earlier_clusters.size(); ++e)
        for (auto id : earlier_clusters[e].alert_ids) owner[id].push_back(e);

    std::vector<bool> absorbed(earlier_clusters.size(), false);
    MergeOutcome out;
    out.carried.reserve(later.size());
    for (const Cluster& l : later) {
        Cluster current = l;
        std::set<std::size_t> candidates;
        for (auto id : l.alert_ids)
            if (auto it = owner.find(id); it != owner.end()) candidates.insert(it->second.begin(), it->second.end());

        for (std::size_t e : candidates) {
            if (absorbed[e]) continue;
            const auto& ids_e = earlier_clusters[e].alert_ids;
            std::unordered_set<std::uint64_t> cur(current.alert_ids.begin(), current.alert_ids.end());
            std::size_t shared = 0;
            for (auto id : ids_e) shared += cur.contains(id);
            const double ratio = static_cast<double>(shared) /
                                 static_cast<double>(std::min(ids_e.size(), current.alert_ids.size()));
            if (ratio <= 0.5) continue;

            for (auto id : ids_e) cur.insert(id);
            std::vector<const Alert*> members;
            members.reserve(cur.size());
            for (auto id : cur) members.push_back(&index.at(id));
            if (!cluster_valid(members, p, mapping)) continue;

            current.alert_ids = sorted_ids(members);
            current.avg_similarity = average_similarity(members, p);
            absorbed[e] = true;
        }
        out.carried.push_back(std::move(current));
    }
    for (std::size_t e = 0; e < earlier_clusters.size(); ++e)
        if (!absorbed[e]) out.retired.push_back(earlier_clusters[e]);
    return out;
}

// ---------------------------------------------------------------------------
// Correlation index
// ---------------------------------------------------------------------------

CorrelationResult correlation_index(std::span<const Alert* const> members, const StepMapping& mapping,
                                    CorrelationMode mode) {
    std::array<const Alert*, kStepCount> at{};
    for (const Alert* a : members) {
        auto& slot = at[index_of(mapping.step_of(a->alert_type))];
        if (slot) throw ContractViolation("two alerts share one step inside a cluster");
        slot = a;
    }
    const Alert* A = at[0];
    const Alert* B = at[1];
    const Alert* C = at[2];
    const Alert* D = at[3];
    const Alert* E = at[4];
    auto same = [](const Alert* x, Ipv4 host) { return x && x->infected_host == host; };

    CorrelationResult r;
    r.corr_ab = (A && B && B->infected_host == A->infected_host) ? 1 : 0;
    r.corr_bc = (C && (same(B, C->infected_host) || same(A, C->infected_host))) ? 1 : 0;
    r.corr_cd =
        (D && (same(C, D->infected_host) || same(B, D->infected_host) || same(A, D->infected_host))) ? 1 : 0;

    bool de = false;
    if (E && D) {
        de = E->infected_host == D->infected_host ||
             (D->scanned_host && E->infected_host == *D->scanned_host);
    }
    if (!de && E && mode == CorrelationMode::extended)
        de = same(C, E->infected_host) || same(B, E->infected_host) || same(A, E->infected_host);
    r.corr_de = de ? 1 : 0;

    r.corr_final = r.corr_ab + r.corr_bc + r.corr_cd + r.corr_de;
    r.label = label_for(r.corr_final);
    return r;
}

CorrelationResult correlation_index(const Cluster& c, const AlertIndex& index, const StepMapping& mapping,
                                    CorrelationMode mode) {
    const auto members = resolve(c.alert_ids, index);
    auto r = correlation_index(members, mapping, mode);
    r.cluster_id = c.cluster_id;
    return r;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

CorrelationOutput correlate(std::span<const Alert> alerts, const CorrelationParams& p, const StepMapping& mapping) {
    validate(p);
    CorrelationOutput out;
    out.assignments.reserve(alerts.size());
    for (const Alert& a : alerts) out.assignments.push_back({a.alert_id, std::nullopt, 0, ScenarioLabel::non_apt});
    if (alerts.empty()) return out;

    std::vector<Alert> sorted(alerts.begin(), alerts.end());
    std::sort(sorted.begin(), sorted.end(), earlier);
    const std::vector<Alert> kept = filter_duplicates(sorted, p.delta_t);
    out.duplicates_filtered = sorted.size() - kept.size();
    const AlertIndex index(kept);

    const EpochSeconds t0 = kept.front().timestamp;
    const EpochSeconds t_last = kept.back().timestamp;
    const std::size_t window_count = static_cast<std::size_t>((t_last - t0) / p.slide) + 1;
    out.window_count = window_count;

    std::vector<std::vector<Cluster>> per_window(window_count);
    parallel_for(window_count, p.threads, [&](std::size_t w) {
        const EpochSeconds start = t0 + static_cast<EpochSeconds>(w) * p.slide;
        const EpochSeconds stop = start + p.delta_t;  // exclusive
        auto lo = std::lower_bound(kept.begin(), kept.end(), start,
                                   [](const Alert& a, EpochSeconds t) { return a.timestamp < t; });
        auto hi = std::lower_bound(lo, kept.end(), stop,
                                   [](const Alert& a, EpochSeconds t) { return a.timestamp < t; });
        const std::span<const Alert> slice(&*lo, static_cast<std::size_t>(hi - lo));
        per_window[w] = cluster_window(slice, TimeRange{start, stop}, p, mapping, static_cast<int>(w));
    });

    std::vector<Cluster> merged;
    std::vector<Cluster> carry = std::move(per_window[0]);
    for (std::size_t w = 1; w < window_count; ++w) {
        auto step = merge_adjacent(carry, per_window[w], index, p, mapping);
        merged.insert(merged.end(), std::make_move_iterator(step.retired.begin()),
                      std::make_move_iterator(step.retired.end()));
        carry = std::move(step.carried);
    }
    merged.insert(merged.end(), std::make_move_iterator(carry.begin()), std::make_move_iterator(carry.end()));

    // An alert may still sit in two clusters when a union was rejected; larger
    // clusters claim their members first and the rest are trimmed.
    std::stable_sort(merged.begin(), merged.end(), [&](const Cluster& a, const Cluster& b) {
        if (a.alert_ids.size() != b.alert_ids.size()) return a.alert_ids.size() > b.alert_ids.size();
        if (std::fabs(a.avg_similarity - b.avg_similarity) > kTieEpsilon) return a.avg_similarity > b.avg_similarity;
        return earlier(index.at(a.alert_ids.front()), index.at(b.alert_ids.front()));
    });
    std::unordered_set<std::uint64_t> claimed;
    std::vector<Cluster> final_clusters;
    for (Cluster& c : merged) {
        std::vector<const Alert*> members;
        for (auto id : c.alert_ids)
            if (!claimed.contains(id)) members.push_back(&index.at(id));
        if (members.size() != c.alert_ids.size()) {
            if (!cluster_valid(members, p, mapping)) continue;
            c.alert_ids = sorted_ids(members);
            c.avg_similarity = average_similarity(members, p);
        }
        for (auto id : c.alert_ids) claimed.insert(id);
        final_clusters.push_back(std::move(c));
    }
    std::sort(final_clusters.begin(), final_clusters.end(), [&](const Cluster& a, const Cluster& b) {
        return earlier(index.at(a.alert_ids.front()), index.at(b.alert_ids.front()));
    });

    std::unordered_map<std::uint64_t, std::size_t> cluster_of;
    for (std::size_t i = 0; i < final_clusters.size(); ++i) {
        Cluster& c = final_clusters[i];
        c.cluster_id = i + 1;
        out.results.push_back(correlation_index(c, index, mapping, p.mode));
        for (auto id : c.alert_ids) cluster_of[id] = i;
    }
    for (auto& asg : out.assignments) {
        auto it = cluster_of.find(asg.alert_id);
        if (it == cluster_of.end()) continue;
        const auto& r = out.results[it->second];
        asg.cluster_id = r.cluster_id;
        asg.corr_final = r.corr_final;
        asg.label = r.label;
    }
    out.clusters = std::move(final_clusters);
    return out;
}

}  // namespace aptsynth
