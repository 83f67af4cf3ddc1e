#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {

int proto_slot(std::uint16_t port) {
    if (port == 80) return 0;
    if (port == 53) return 1;
    if (port == 443) return 2;
    return 3;
}

template <class T>
std::size_t position(const std::vector<T>& sorted, const T& v) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

bool rules_hold(const std::vector<const Alert*>& g, const StepMapping& mapping, DurationSeconds delta_t) {
    if (g.size() < 2) return false;
    std::set<int> steps, types;
    EpochSeconds lo = g[0]->timestamp, hi = lo;
    for (const Alert* a : g) {
        if (!steps.insert(int(mapping.step_of(a->alert_type))).second) return false;
        if (!types.insert(int(a->alert_type)).second) return false;
        lo = std::min(lo, a->timestamp);
        hi = std::max(hi, a->timestamp);
    }
    if (hi - lo > delta_t) return false;
    for (const Alert* x : g)
        for (const Alert* y : g)
            if (mapping.step_of(x->alert_type) < mapping.step_of(y->alert_type) && !(x->timestamp < y->timestamp))
                return false;
    return true;
}

}  // namespace

std::vector<double> dense_vector(const Alert& a, std::span<const Alert> window_alerts, EpochSeconds window_begin,
                                 DurationSeconds window_length, const BlockWeights& w) {
    std::vector<std::uint32_t> src, dst;
    for (const Alert& x : window_alerts) {
        src.push_back(x.src_ip.value);
        dst.push_back(x.dest_ip.value);
    }
    for (auto* v : {&src, &dst}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    std::vector<double> out(14 + src.size() + dst.size() + 4 + 2, 0.0);
    std::size_t off = 0;
    out[off + static_cast<std::size_t>(a.alert_type)] = w.type;
    off += 14;
    out[off + position(src, a.src_ip.value)] = w.src;
    off += src.size();
    out[off + position(dst, a.dest_ip.value)] = w.dst;
    off += dst.size();
    out[off + static_cast<std::size_t>(proto_slot(a.dest_port))] = w.proto;
    off += 4;
    out[off] = w.severity * severity_of(a.alert_type) / 5.0;
    out[off + 1] = w.timestamp * double(a.timestamp - window_begin) / double(window_length);
    return out;
}

double cosine(const std::vector<double>& x, const std::vector<double>& y) {
    const double dot = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    const double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return dot / (nx * ny);
}

int corr_final(std::span<const Alert* const> members, const StepMapping& mapping, bool strict) {
    std::map<AptStep, const Alert*> by;
    for (const Alert* a : members) {
        if (by.count(mapping.step_of(a->alert_type))) throw std::logic_error("two alerts on one step");
        by[mapping.step_of(a->alert_type)] = a;
    }
    auto has = [&](AptStep s) { return by.count(s) > 0; };
    auto host = [&](AptStep s) { return by.at(s)->infected_host; };
    auto eq = [&](AptStep x, AptStep y) { return has(x) && has(y) && host(x) == host(y); };
    using enum AptStep;

    const int ab = eq(B, A);
    const int bc = has(C) && (eq(C, B) || eq(C, A));
    const int cd = has(D) && (eq(D, C) || eq(D, B) || eq(D, A));
    bool de = has(E) && has(D) &&
              (host(E) == host(D) || (by.at(D)->scanned_host && host(E) == *by.at(D)->scanned_host));
    if (!strict) de = de || (has(E) && (eq(E, C) || eq(E, B) || eq(E, A)));
    return ab + bc + cd + int(de);
}

std::vector<Group> reference_clusters(std::span<const Alert> window_alerts, EpochSeconds window_begin,
                                      DurationSeconds delta_t, double tau, const StepMapping& mapping, bool strict,
                                      const BlockWeights& w) {
    const std::size_t n = window_alerts.size();
    std::vector<std::vector<double>> vec;
    for (const Alert& a : window_alerts) vec.push_back(dense_vector(a, window_alerts, window_begin, delta_t, w));
    std::vector<std::vector<double>> S(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && std::llabs(window_alerts[i].timestamp - window_alerts[j].timestamp) <= delta_t)
                S[i][j] = cosine(vec[i], vec[j]);

    // Connected components of S > tau.
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = ncomp;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v)
                if (comp[v] < 0 && S[u][v] > tau) {
                    comp[v] = ncomp;
                    stack.push_back(v);
                }
        }
        ++ncomp;
    }

    auto earlier = [&](std::size_t x, std::size_t y) {
        const Alert& a = window_alerts[x];
        const Alert& b = window_alerts[y];
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.alert_id < b.alert_id;
    };

    std::vector<Group> out;
    for (int c = 0; c < ncomp; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (comp[i] == c) members.push_back(i);
        if (members.size() < 2) continue;
        if (members.size() > 20) throw std::runtime_error("component too large for exhaustive search");
        std::sort(members.begin(), members.end(), earlier);

        std::vector<bool> taken(members.size(), false);
        for (;;) {
            std::vector<std::size_t> best;
            double best_avg = -1.0;
            const std::uint32_t full = (1u << members.size()) - 1;
            for (std::uint32_t mask = 1; mask <= full; ++mask) {
                std::vector<std::size_t> pick;
                bool ok = true;
                for (std::size_t b = 0; b < members.size(); ++b)
                    if (mask >> b & 1u) {
                        if (taken[b]) {
                            ok = false;
                            break;
                        }
                        pick.push_back(members[b]);
                    }
                if (!ok || pick.size() < 2 || pick.size() < best.size()) continue;
                std::vector<const Alert*> g;
                for (auto i : pick) g.push_back(&window_alerts[i]);
                if (!rules_hold(g, mapping, delta_t)) continue;
                double sum = 0.0;
                for (std::size_t x = 0; x < pick.size(); ++x)
                    for (std::size_t y = x + 1; y < pick.size(); ++y) sum += S[pick[x]][pick[y]];
                const double avg = sum / double(pick.size() * (pick.size() - 1) / 2);
                if (avg < tau) continue;
                bool better = pick.size() > best.size() || avg > best_avg + 1e-12;
                if (!better && std::fabs(avg - best_avg) <= 1e-12 && pick.size() == best.size())
                    better = std::lexicographical_compare(pick.begin(), pick.end(), best.begin(), best.end(), earlier);
                if (better) {
                    best = pick;
                    best_avg = avg;
                }
            }
            if (best.empty()) break;
            Group g;
            std::vector<const Alert*> ptrs;
            for (auto i : best) {
                g.ids.insert(window_alerts[i].alert_id);
                ptrs.push_back(&window_alerts[i]);
                taken[static_cast<std::size_t>(std::find(members.begin(), members.end(), i) - members.begin())] = true;
            }
            g.corr_final = corr_final(ptrs, mapping, strict);
            out.push_back(std::move(g));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracle
