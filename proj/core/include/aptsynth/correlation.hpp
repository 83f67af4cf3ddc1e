#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aptsynth/alert.hpp"
#include "aptsynth/step_mapping.hpp"

namespace aptsynth {

// ---------------------------------------------------------------------------
// Labels and parameters
// ---------------------------------------------------------------------------

enum class ScenarioLabel : std::uint8_t { non_apt = 0, two_steps, three_steps, full };

std::string_view label_name(ScenarioLabel l);
std::optional<ScenarioLabel> parse_label(std::string_view text);
// 0 -> Non-APT, 1 -> two steps, 2 -> three steps, anything higher -> full.
ScenarioLabel label_for(int corr_final);

// strict: the exfiltration step links only to the discovery step (its scanned
// or infected host). extended: it may also link back to C, B or A.
enum class CorrelationMode : std::uint8_t { strict, extended };
std::string_view mode_name(CorrelationMode m);
std::optional<CorrelationMode> parse_mode(std::string_view text);

// Per-block scale applied to the one-hot / scalar blocks of a feature vector.
// The source-host block dominates so that alerts from one infected host stay
// above the clustering threshold and alerts from different hosts fall below it.
struct FeatureWeights {
    double type = 0.31622776601683794;  // sqrt(0.1)
    double src = 1.0;
    double dst = 0.31622776601683794;
    double proto = 0.31622776601683794;
    double severity = 0.31622776601683794;
    double timestamp = 0.31622776601683794;

    friend bool operator==(const FeatureWeights&, const FeatureWeights&) = default;
};

// Upper bound of the cosine similarity between two alerts with different
// source hosts. When tau is at or above it, neighbour search can be restricted
// to alerts sharing a source host without changing the result.
double max_cross_host_similarity(const FeatureWeights& w);

struct CorrelationParams {
    double tau = 0.6;
    DurationSeconds delta_t = 168 * kHour;
    DurationSeconds slide = 84 * kHour;
    int k_cap = 14;
    // 0 selects the default policy: distinct alert types in the window, capped
    // at k_cap and at window size - 1.
    int k_override = 0;
    CorrelationMode mode = CorrelationMode::strict;
    FeatureWeights weights;
    unsigned threads = 1;
};

// Throws ConfigError on out-of-range values.
void validate(const CorrelationParams& p);

// ---------------------------------------------------------------------------
// Features and similarity
// ---------------------------------------------------------------------------

// Host vocabulary of a window: positions of the one-hot source/destination
// blocks.
class HostVocabulary {
public:
    HostVocabulary() = default;
    explicit HostVocabulary(std::span<const Alert> alerts);

    std::size_t src_size() const { return src_.size(); }
    std::size_t dst_size() const { return dst_.size(); }
    std::optional<std::size_t> src_index(Ipv4 ip) const;
    std::optional<std::size_t> dst_index(Ipv4 ip) const;

private:
    std::vector<Ipv4> src_;
    std::vector<Ipv4> dst_;
};

// Dense layout: [type x14][src x |vocab|][dst x |vocab|][proto x4][severity][timestamp].
struct FeatureVector {
    std::vector<double> values;
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

std::size_t feature_length(const HostVocabulary& vocab);

// Throws ContractViolation if the timestamp lies outside `window` or a host is
// missing from the vocabulary.
FeatureVector encode_features(const Alert& a, TimeRange window, const HostVocabulary& vocab,
                              const FeatureWeights& w = {});

// Cosine similarity, forced to 0 when |t1 - t2| > delta_t. A zero vector has
// similarity 0 with everything.
double similarity(const FeatureVector& f1, const FeatureVector& f2, EpochSeconds t1, EpochSeconds t2,
                  DurationSeconds delta_t);

// Same vector as encode_features, stored by block instead of densely.
struct CompactFeature {
    AlertType type;
    Ipv4 src;
    Ipv4 dst;
    Protocol proto;
    double severity;   // severity / 5
    double timestamp;  // min-max normalised inside the window
    double norm;
};

CompactFeature compact_features(const Alert& a, TimeRange window, const FeatureWeights& w);
double compact_similarity(const CompactFeature& a, const CompactFeature& b, const FeatureWeights& w);

// ---------------------------------------------------------------------------
// Clusters
// ---------------------------------------------------------------------------

struct Cluster {
    std::uint64_t cluster_id = 0;
    std::vector<std::uint64_t> alert_ids;  // ordered by (timestamp, alert_id)
    int window_index = 0;
    double avg_similarity = 0.0;

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct CorrelationResult {
    std::uint64_t cluster_id = 0;
    int corr_ab = 0;
    int corr_bc = 0;
    int corr_cd = 0;
    int corr_de = 0;
    int corr_final = 0;
    ScenarioLabel label = ScenarioLabel::non_apt;

    friend bool operator==(const CorrelationResult&, const CorrelationResult&) = default;
};

// Lookup from alert id to alert; the viewed alerts must outlive it.
class AlertIndex {
public:
    explicit AlertIndex(std::span<const Alert> alerts);
    const Alert& at(std::uint64_t alert_id) const;
    bool contains(std::uint64_t alert_id) const { return by_id_.contains(alert_id); }
    std::span<const Alert> alerts() const { return alerts_; }

private:
    std::span<const Alert> alerts_;
    std::unordered_map<std::uint64_t, std::size_t> by_id_;
};

// Empty when the members satisfy every cluster rule: size >= 2, pairwise
// distinct steps and types, timestamps strictly increasing with the step,
// span <= delta_t. avgSim is checked separately.
std::vector<std::string> cluster_rule_violations(std::span<const Alert* const> members, const StepMapping& mapping,
                                                 DurationSeconds delta_t);

// Mean pairwise similarity with timestamps normalised over
// [earliest member, earliest member + delta_t].
double average_similarity(std::span<const Alert* const> members, const CorrelationParams& p);

// Keeps the earliest alert per (alert_type, src_ip, dest_ip) key; a later alert
// is dropped when it lies within delta_t of the last kept alert with the same
// key. Input must be sorted by timestamp (ContractViolation otherwise).
std::vector<Alert> filter_duplicates(std::span<const Alert> alerts, DurationSeconds delta_t);

// Mutual-kNN clustering of one window: edges between alerts
// that are in each other's top-k with similarity > tau; connected components
// are repaired greedily until they satisfy the cluster rules. `window` gives
// the timestamp normalisation range; every alert must lie inside it.
std::vector<Cluster> cluster_window(std::span<const Alert> alerts, TimeRange window, const CorrelationParams& p,
                                    const StepMapping& mapping, int window_index = 0);

// k used for a window under the default policy.
int k_for_window(std::span<const Alert> alerts, const CorrelationParams& p);

struct MergeOutcome {
    // Clusters of the later window, each possibly unioned with an earlier one.
    std::vector<Cluster> carried;
    // Earlier clusters that were not absorbed into a later one.
    std::vector<Cluster> retired;

    std::vector<Cluster> all() const;
};

// Unions clusters of adjacent windows whose overlap |ci ∩ cj| / min(|ci|,|cj|)
// exceeds 0.5, keeping a union only if it still satisfies the cluster rules.
MergeOutcome merge_adjacent(const std::vector<Cluster>& earlier, const std::vector<Cluster>& later,
                            const AlertIndex& index, const CorrelationParams& p, const StepMapping& mapping);

// Host-chain scoring of one cluster. Throws ContractViolation when two members
// share a step.
CorrelationResult correlation_index(std::span<const Alert* const> members, const StepMapping& mapping,
                                    CorrelationMode mode);
CorrelationResult correlation_index(const Cluster& c, const AlertIndex& index, const StepMapping& mapping,
                                    CorrelationMode mode);

struct AlertAssignment {
    std::uint64_t alert_id = 0;
    std::optional<std::uint64_t> cluster_id;
    int corr_final = 0;
    ScenarioLabel label = ScenarioLabel::non_apt;

    friend bool operator==(const AlertAssignment&, const AlertAssignment&) = default;
};

struct CorrelationOutput {
    std::vector<Cluster> clusters;               // ids 1..n, ordered by first member
    std::vector<CorrelationResult> results;      // parallel to clusters
    std::vector<AlertAssignment> assignments;    // parallel to the input alerts
    std::size_t duplicates_filtered = 0;
    std::size_t window_count = 0;
};

// filter_duplicates -> sliding windows -> cluster_window -> merge_adjacent ->
// correlation_index. Alert ids must be unique. Output does not depend on
// p.threads.
CorrelationOutput correlate(std::span<const Alert> alerts, const CorrelationParams& p, const StepMapping& mapping);

}  // namespace aptsynth
