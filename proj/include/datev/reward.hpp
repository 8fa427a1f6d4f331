#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace datev {

/// Which branch of the selection logic produced a decision.
enum class Phase { Exploration, SemiExploration, Exploitation, Oracle, Baseline };

std::string to_string(Phase phase);

/// Per-candidate completion probabilities, keyed by candidate id.
/// Also used for realized qualities, where every entry is 0 or 1.
class QualityVector {
public:
    QualityVector() = default;
    QualityVector(std::initializer_list<std::pair<const int, double>> init);

    /// Inserts or overwrites an entry. Values must lie in [0, 1].
    void set(int candidate, double mu);
    double at(int candidate) const;
    bool contains(int candidate) const;
    std::size_t size() const { return entries_.size(); }
    const std::map<int, double>& entries() const { return entries_; }

private:
    std::map<int, double> entries_;
};

struct RewardParams {
    double eta = 0.1;  // unit cost per replication, 0 <= eta < 1
};

struct ReplicationDecision {
    std::int64_t task_id = 0;
    std::vector<int> selected;  // distinct candidate ids, in selection order
    Phase phase = Phase::Exploitation;
};

/// Expected set reward: (1 - prod_{v in subset}(1 - mu_v)) - eta * |subset|.
/// The empty subset yields 0.
double expected_reward(const QualityVector& mu, const std::vector<int>& subset,
                       const RewardParams& params);

/// Realized set reward from 0/1 qualities: 1 - eta*k if any quality is 1,
/// -eta*k otherwise. Empty set yields 0.
double realized_reward(const QualityVector& qualities, const RewardParams& params);

/// Gain of adding `candidate` on top of `base`:
/// mu_candidate * prod_{v in base}(1 - mu_v) - eta.
double marginal_reward(const QualityVector& mu, int candidate,
                       const std::vector<int>& base, const RewardParams& params);

/// Greedy extension used by both the plain greedy selector and the
/// semi-exploration fill: repeatedly appends the pool candidate with the
/// largest marginal reward given `base` plus picks so far, stopping once the
/// best marginal is <= 0 or `max_extra` picks were made. Ties go to the
/// smallest candidate id. Returns only the appended picks.
std::vector<int> greedy_extend(const QualityVector& mu, std::vector<int> pool,
                               const std::vector<int>& base, int max_extra,
                               const RewardParams& params);

/// Greedy maximization of the expected set reward under a cardinality budget.
/// Optimal for this reward family, which the brute-force selector verifies.
ReplicationDecision greedy_select(const QualityVector& mu, const std::vector<int>& candidates,
                                  int budget, const RewardParams& params);

/// Exhaustive maximizer over all subsets of size <= budget. Test oracle for
/// greedy_select; ties broken by smaller cardinality, then lexicographic ids.
/// Guarded to at most 20 candidates.
ReplicationDecision brute_force_select(const QualityVector& mu,
                                       const std::vector<int>& candidates, int budget,
                                       const RewardParams& params);

}  // namespace datev
