#include "datev/reward.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace datev {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Exploration: return "exploration";
        case Phase::SemiExploration: return "semi-exploration";
        case Phase::Exploitation: return "exploitation";
        case Phase::Oracle: return "oracle";
        case Phase::Baseline: return "baseline";
    }
    return "unknown";
}

QualityVector::QualityVector(std::initializer_list<std::pair<const int, double>> init) {
    for (const auto& [id, mu] : init) set(id, mu);
}

void QualityVector::set(int candidate, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("quality for candidate " + std::to_string(candidate) +
                                    " outside [0,1]: " + std::to_string(mu));
    }
    entries_[candidate] = mu;
}

double QualityVector::at(int candidate) const {
    auto it = entries_.find(candidate);
    if (it == entries_.end()) {
        throw std::invalid_argument("unknown candidate id " + std::to_string(candidate));
    }
    return it->second;
}

bool QualityVector::contains(int candidate) const {
    return entries_.count(candidate) != 0;
}

double expected_reward(const QualityVector& mu, const std::vector<int>& subset,
                       const RewardParams& params) {
    if (subset.empty()) return 0.0;
    double miss = 1.0;  // probability that no selected replication completes
    for (int v : subset) miss *= 1.0 - mu.at(v);
    return (1.0 - miss) - params.eta * static_cast<double>(subset.size());
}

double realized_reward(const QualityVector& qualities, const RewardParams& params) {
    if (qualities.entries().empty()) return 0.0;
    bool any = false;
    for (const auto& [id, q] : qualities.entries()) {
        if (q != 0.0 && q != 1.0) {
            throw std::invalid_argument("realized quality must be 0 or 1, got " +
                                        std::to_string(q));
        }
        any = any || q == 1.0;
    }
    const double cost = params.eta * static_cast<double>(qualities.size());
    return any ? 1.0 - cost : -cost;
}

double marginal_reward(const QualityVector& mu, int candidate, const std::vector<int>& base,
                       const RewardParams& params) {
    if (std::find(base.begin(), base.end(), candidate) != base.end()) {
        throw std::invalid_argument("candidate " + std::to_string(candidate) +
                                    " already in base set");
    }
    double miss = 1.0;
    for (int v : base) miss *= 1.0 - mu.at(v);
    return mu.at(candidate) * miss - params.eta;
}

std::vector<int> greedy_extend(const QualityVector& mu, std::vector<int> pool,
                               const std::vector<int>& base, int max_extra,
                               const RewardParams& params) {
    std::sort(pool.begin(), pool.end());
    double miss = 1.0;
    for (int v : base) miss *= 1.0 - mu.at(v);

    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < max_extra && !pool.empty()) {
        // marginal of v given (base + picks) is mu_v * miss - eta; the running
        // product makes each round O(|pool|)
        int best = -1;
        std::size_t best_pos = 0;
        double best_marginal = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const double m = mu.at(pool[i]) * miss - params.eta;
            if (m > best_marginal) {
                best_marginal = m;
                best = pool[i];
                best_pos = i;
            }
        }
        if (!(best_marginal > 0.0)) break;  // strict: zero-marginal picks are not added
        picks.push_back(best);
        miss *= 1.0 - mu.at(best);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    return picks;
}

ReplicationDecision greedy_select(const QualityVector& mu, const std::vector<int>& candidates,
                                  int budget, const RewardParams& params) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    ReplicationDecision decision;
    decision.selected = greedy_extend(mu, candidates, {}, budget, params);
    return decision;
}

ReplicationDecision brute_force_select(const QualityVector& mu,
                                       const std::vector<int>& candidates, int budget,
                                       const RewardParams& params) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (candidates.size() > 20) {
        throw std::length_error("brute_force_select limited to 20 candidates, got " +
                                std::to_string(candidates.size()));
    }
    std::vector<int> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());

    const int n = static_cast<int>(sorted.size());
    ReplicationDecision best;
    double best_reward = 0.0;  // empty subset
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (std::popcount(mask) > budget) continue;
        std::vector<int> subset;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) subset.push_back(sorted[i]);
        }
        const double r = expected_reward(mu, subset, params);
        const bool better =
            r > best_reward ||
            (r == best_reward && (subset.size() < best.selected.size() ||
                                  (subset.size() == best.selected.size() &&
                                   !best.selected.empty() && subset < best.selected)));
        if (better) {
            best_reward = r;
            best.selected = std::move(subset);
        }
    }
    return best;
}

}  // namespace datev
