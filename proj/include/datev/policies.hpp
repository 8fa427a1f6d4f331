#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "datev/env.hpp"
#include "datev/learner.hpp"
#include "datev/reward.hpp"

namespace datev {

struct PolicyDecision {
    ReplicationDecision decision;
    bool misexploitation = false;
};

/// Uniform harness contract. A policy sees the public side of a round (task
/// metadata and candidate contexts) and receives realized qualities later as
/// feedback events; the hidden fields of Candidate are for the harness only,
/// except that the oracle is explicitly allowed to read true_mu.
/// One owner per instance: select/feedback/drain must be serialized.
class Policy {
public:
    explicit Policy(std::string name) : name_(std::move(name)) {}
    virtual ~Policy() = default;

    const std::string& name() const { return name_; }

    virtual PolicyDecision select(const TaskRound& round, std::int64_t t) = 0;

    /// Queues a realized quality until drain() reaches its ready time.
    virtual void feedback(FeedbackEvent event);
    /// Applies every queued event with ready_time <= now; returns the count.
    virtual std::size_t drain(double now);
    virtual std::size_t pending() const { return pending_.size(); }

protected:
    /// Per-policy learning update for one observed quality.
    virtual void apply(const FeedbackEvent& event) { (void)event; }

private:
    struct ReadyOrder {
        bool operator()(const FeedbackEvent& a, const FeedbackEvent& b) const {
            return a.ready_time > b.ready_time;
        }
    };
    std::string name_;
    std::priority_queue<FeedbackEvent, std::vector<FeedbackEvent>, ReadyOrder> pending_;
};

/// Greedy selection with the true qualities; optimal for this reward family.
ReplicationDecision oracle_select(const Task& task, const std::vector<int>& candidates,
                                  const QualityVector& true_mu, const RewardParams& params);

/// min(budget, |candidates|) uniform distinct picks; always spends the budget.
ReplicationDecision random_select(const Task& task, const std::vector<int>& candidates,
                                  int budget, std::mt19937_64& rng);

/// The partition learner behind the uniform policy interface.
class DateVPolicy : public Policy {
public:
    DateVPolicy(const LearnerConfig& config, std::uint64_t seed);

    PolicyDecision select(const TaskRound& round, std::int64_t t) override;
    void feedback(FeedbackEvent event) override;
    std::size_t drain(double now) override;
    std::size_t pending() const override;

    const Learner& learner() const { return learner_; }

private:
    Learner learner_;
};

class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(const RewardParams& params) : Policy("oracle"), params_(params) {}
    PolicyDecision select(const TaskRound& round, std::int64_t t) override;

private:
    RewardParams params_;
};

/// Index policy mu_hat + sqrt(2 ln t / n) repeated for the whole budget.
/// Arms are server-vehicle ids by default; "pair" keys them by the
/// (task vehicle, server vehicle) pair instead.
class UcbPolicy : public Policy {
public:
    explicit UcbPolicy(bool pair_arms) : Policy("ucb"), pair_arms_(pair_arms) {}
    PolicyDecision select(const TaskRound& round, std::int64_t t) override;

protected:
    void apply(const FeedbackEvent& event) override;

private:
    struct Arm {
        std::int64_t pulls = 0;
        double reward_sum = 0.0;
    };
    std::int64_t arm_key(std::int64_t task_id, int candidate) const;

    bool pair_arms_ = false;
    std::map<std::int64_t, Arm> arms_;
    std::map<std::int64_t, int> tav_of_task_;  // filled at decision time
};

/// One shared ridge-regularized linear model over contexts; each round picks
/// the whole budget by score theta^T phi + alpha * sqrt(phi^T A^-1 phi),
/// sequentially removing picked candidates.
class MLinUcbPolicy : public Policy {
public:
    MLinUcbPolicy(int dim, double alpha);
    PolicyDecision select(const TaskRound& round, std::int64_t t) override;

    double score(const ContextVector& phi) const;

protected:
    void apply(const FeedbackEvent& event) override;

private:
    int dim_;
    double alpha_;
    Eigen::MatrixXd design_;       // A
    Eigen::VectorXd response_;     // b
};

class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : Policy("random"), rng_(seed) {}
    PolicyDecision select(const TaskRound& round, std::int64_t t) override;

private:
    std::mt19937_64 rng_;
};

struct PolicyOptions {
    LearnerConfig learner;
    RewardParams reward;
    bool ucb_pair_arms = false;
    double mlinucb_alpha = 1.0;
};

/// kind is one of: datev, oracle, ucb, mlinucb, random.
std::unique_ptr<Policy> make_policy(const std::string& kind, const PolicyOptions& options,
                                    std::uint64_t seed);

}  // namespace datev
