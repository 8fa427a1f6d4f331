#include "datev/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "datev/rng.hpp"

namespace datev {

namespace {

std::vector<int> candidate_ids(const TaskRound& round) {
    std::vector<int> ids;
    ids.reserve(round.candidates.size());
    for (const Candidate& c : round.candidates) ids.push_back(c.id);
    return ids;
}

// Whole-budget variant shared by the index policies: take the k best scores,
// ties to the smaller id (scores are fixed within a round).
std::vector<int> top_k_by_score(std::vector<std::pair<double, int>> scored, int budget) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::size_t k = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(budget));
    std::vector<int> picks;
    for (std::size_t i = 0; i < k; ++i) picks.push_back(scored[i].second);
    std::sort(picks.begin(), picks.end());
    return picks;
}

}  // namespace

void Policy::feedback(FeedbackEvent event) { pending_.push(std::move(event)); }

std::size_t Policy::drain(double now) {
    std::size_t applied = 0;
    while (!pending_.empty() && pending_.top().ready_time <= now) {
        apply(pending_.top());
        pending_.pop();
        ++applied;
    }
    return applied;
}

ReplicationDecision oracle_select(const Task& task, const std::vector<int>& candidates,
                                  const QualityVector& true_mu, const RewardParams& params) {
    ReplicationDecision decision = greedy_select(true_mu, candidates, task.budget, params);
    decision.task_id = task.id;
    decision.phase = Phase::Oracle;
    return decision;
}

ReplicationDecision random_select(const Task& task, const std::vector<int>& candidates,
                                  int budget, std::mt19937_64& rng) {
    std::vector<int> pool = candidates;
    int k = std::min<int>(budget, static_cast<int>(pool.size()));
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    ReplicationDecision decision;
    decision.task_id = task.id;
    decision.phase = Phase::Baseline;
    decision.selected.assign(pool.begin(), pool.begin() + k);
    std::sort(decision.selected.begin(), decision.selected.end());
    return decision;
}

DateVPolicy::DateVPolicy(const LearnerConfig& config, std::uint64_t seed)
    : Policy("datev"), learner_(config, seed) {}

PolicyDecision DateVPolicy::select(const TaskRound& round, std::int64_t t) {
    SelectResult res = learner_.select(round.task.id, round.candidate_views(), t, round.task.budget);
    return {res.decision, res.misexploitation};
}

void DateVPolicy::feedback(FeedbackEvent event) { learner_.enqueue_feedback(std::move(event)); }

std::size_t DateVPolicy::drain(double now) { return learner_.drain_ready(now); }

std::size_t DateVPolicy::pending() const { return learner_.pending_feedback(); }

PolicyDecision OraclePolicy::select(const TaskRound& round, std::int64_t) {
    return {oracle_select(round.task, candidate_ids(round), round.mu_vector(), params_), false};
}

std::int64_t UcbPolicy::arm_key(std::int64_t task_id, int candidate) const {
    if (!pair_arms_) return candidate;
    auto it = tav_of_task_.find(task_id);
    int tav = it == tav_of_task_.end() ? -1 : it->second;
    return (static_cast<std::int64_t>(tav) << 32) | static_cast<std::uint32_t>(candidate);
}

PolicyDecision UcbPolicy::select(const TaskRound& round, std::int64_t t) {
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    if (pair_arms_) tav_of_task_[round.task.id] = round.task.tav_id;

    std::vector<std::pair<double, int>> scored;
    for (const Candidate& c : round.candidates) {
        auto it = arms_.find(arm_key(round.task.id, c.id));
        double score;
        if (it == arms_.end() || it->second.pulls == 0) {
            score = std::numeric_limits<double>::infinity();
        } else {
            const Arm& arm = it->second;
            score = arm.reward_sum / static_cast<double>(arm.pulls) +
                    std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                              static_cast<double>(arm.pulls));
        }
        scored.emplace_back(score, c.id);
    }

    PolicyDecision out;
    out.decision.task_id = round.task.id;
    out.decision.phase = Phase::Baseline;
    out.decision.selected = top_k_by_score(std::move(scored), round.task.budget);
    return out;
}

void UcbPolicy::apply(const FeedbackEvent& event) {
    Arm& arm = arms_[arm_key(event.task_id, event.candidate)];
    arm.pulls += 1;
    arm.reward_sum += static_cast<double>(event.quality);
}

MLinUcbPolicy::MLinUcbPolicy(int dim, double alpha)
    : Policy("mlinucb"),
      dim_(dim),
      alpha_(alpha),
      design_(Eigen::MatrixXd::Identity(dim, dim)),
      response_(Eigen::VectorXd::Zero(dim)) {
    if (dim < 1) throw std::invalid_argument("context dimension must be >= 1");
}

double MLinUcbPolicy::score(const ContextVector& phi) const {
    if (static_cast<int>(phi.size()) != dim_)
        throw std::invalid_argument("context dimension mismatch");
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(phi.data(), dim_);
    Eigen::MatrixXd inv = design_.inverse();
    Eigen::VectorXd theta = inv * response_;
    return theta.dot(x) + alpha_ * std::sqrt(x.dot(inv * x));
}

PolicyDecision MLinUcbPolicy::select(const TaskRound& round, std::int64_t) {
    Eigen::MatrixXd inv = design_.inverse();
    Eigen::VectorXd theta = inv * response_;

    std::vector<std::pair<double, int>> scored;
    for (const Candidate& c : round.candidates) {
        if (static_cast<int>(c.phi.size()) != dim_)
            throw std::invalid_argument("context dimension mismatch");
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(c.phi.data(), dim_);
        scored.emplace_back(theta.dot(x) + alpha_ * std::sqrt(x.dot(inv * x)), c.id);
    }

    PolicyDecision out;
    out.decision.task_id = round.task.id;
    out.decision.phase = Phase::Baseline;
    out.decision.selected = top_k_by_score(std::move(scored), round.task.budget);
    return out;
}

void MLinUcbPolicy::apply(const FeedbackEvent& event) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(event.phi.data(), dim_);
    design_ += x * x.transpose();
    response_ += static_cast<double>(event.quality) * x;
}

PolicyDecision RandomPolicy::select(const TaskRound& round, std::int64_t) {
    return {random_select(round.task, candidate_ids(round), round.task.budget, rng_), false};
}

std::unique_ptr<Policy> make_policy(const std::string& kind, const PolicyOptions& options,
                                    std::uint64_t seed) {
    if (kind == "datev")
        return std::make_unique<DateVPolicy>(options.learner, mix_seed({seed, 0xDA7EULL}));
    if (kind == "oracle") return std::make_unique<OraclePolicy>(options.reward);
    if (kind == "ucb") return std::make_unique<UcbPolicy>(options.ucb_pair_arms);
    if (kind == "mlinucb")
        return std::make_unique<MLinUcbPolicy>(options.learner.dim, options.mlinucb_alpha);
    if (kind == "random") return std::make_unique<RandomPolicy>(mix_seed({seed, 0x4A2DULL}));
    throw std::invalid_argument("unknown policy '" + kind + "'");
}

}  // namespace datev
