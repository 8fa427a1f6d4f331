#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "datev/policies.hpp"

using namespace datev;

namespace {

TaskRound make_round(std::int64_t task_id, int budget,
                     const std::vector<std::pair<int, ContextVector>>& candidates,
                     int tav_id = 0) {
    TaskRound round;
    round.task.id = task_id;
    round.task.budget = budget;
    round.task.tav_id = tav_id;
    for (const auto& [id, phi] : candidates) {
        Candidate c;
        c.id = id;
        c.phi = phi;
        round.candidates.push_back(std::move(c));
    }
    return round;
}

FeedbackEvent event_for(std::int64_t task_id, int candidate, const ContextVector& phi,
                        int quality) {
    FeedbackEvent ev;
    ev.task_id = task_id;
    ev.candidate = candidate;
    ev.phi = phi;
    ev.quality = quality;
    ev.ready_time = 0.0;
    return ev;
}

}  // namespace

TEST_CASE("oracle keeps only worthwhile replications") {
    Task task;
    task.id = 1;
    task.budget = 2;
    QualityVector mu;
    mu.set(1, 0.9);
    mu.set(2, 0.1);
    RewardParams params;
    params.eta = 0.2;

    ReplicationDecision d = oracle_select(task, {1, 2}, mu, params);
    CHECK(d.selected == std::vector<int>{1});  // adding v2 has marginal 0.01 - 0.2 < 0
    CHECK(d.phase == Phase::Oracle);
    CHECK(d.task_id == 1);

    // Every quality below the cost: select nothing.
    QualityVector weak;
    weak.set(1, 0.1);
    weak.set(2, 0.15);
    CHECK(oracle_select(task, {1, 2}, weak, params).selected.empty());
}

TEST_CASE("oracle matches exhaustive search") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + static_cast<int>(rng() % 12);
        int budget = 1 + static_cast<int>(rng() % 5);
        QualityVector mu;
        std::vector<int> ids;
        for (int v = 0; v < n; ++v) {
            ids.push_back(v + 1);
            mu.set(v + 1, unit(rng));
        }
        RewardParams params;
        params.eta = 0.5 * unit(rng);

        Task task;
        task.id = trial;
        task.budget = budget;
        ReplicationDecision greedy = oracle_select(task, ids, mu, params);
        ReplicationDecision exact = brute_force_select(mu, ids, budget, params);
        CHECK(std::abs(expected_reward(mu, greedy.selected, params) -
                       expected_reward(mu, exact.selected, params)) <= 1e-12);
    }
}

TEST_CASE("ucb plays unpulled arms first, then the index") {
    UcbPolicy policy(false);

    // All arms unpulled: budget-many smallest ids.
    TaskRound r1 = make_round(1, 2, {{3, {}}, {1, {}}, {2, {}}});
    CHECK(policy.select(r1, 1).decision.selected == std::vector<int>{1, 2});

    // Train arm 1 to 0.5 over 10 pulls and arm 2 to 0.4 over 10 pulls.
    for (int i = 0; i < 10; ++i) {
        policy.feedback(event_for(0, 1, {}, i < 5 ? 1 : 0));
        policy.feedback(event_for(0, 2, {}, i < 4 ? 1 : 0));
    }
    policy.drain(1.0);

    // Equal pull counts make the bonuses cancel; the higher mean wins.
    TaskRound r2 = make_round(2, 1, {{1, {}}, {2, {}}});
    CHECK(policy.select(r2, 100).decision.selected == std::vector<int>{1});

    // A still-unpulled arm outranks both.
    TaskRound r3 = make_round(3, 1, {{1, {}}, {2, {}}, {9, {}}});
    CHECK(policy.select(r3, 100).decision.selected == std::vector<int>{9});

    // Budget >= arms: everything is taken, negative marginals or not.
    TaskRound r4 = make_round(4, 5, {{1, {}}, {2, {}}});
    CHECK(policy.select(r4, 101).decision.selected == std::vector<int>{1, 2});

    CHECK_THROWS_AS(policy.select(r4, 0), std::invalid_argument);
}

TEST_CASE("ucb index favors a short-history arm at large t") {
    UcbPolicy policy(false);
    // Arm 1: mean 0.6 over 100 pulls. Arm 2: mean 0.5 over 4 pulls.
    for (int i = 0; i < 100; ++i) policy.feedback(event_for(0, 1, {}, i < 60 ? 1 : 0));
    for (int i = 0; i < 4; ++i) policy.feedback(event_for(0, 2, {}, i < 2 ? 1 : 0));
    policy.drain(0.0);

    // At t=10000: idx1 = 0.6 + sqrt(2 ln 1e4 / 100) ~ 1.029,
    //             idx2 = 0.5 + sqrt(2 ln 1e4 / 4)   ~ 2.646.
    TaskRound round = make_round(1, 1, {{1, {}}, {2, {}}});
    CHECK(policy.select(round, 10000).decision.selected == std::vector<int>{2});
}

TEST_CASE("ucb arm keying by vehicle or by pair") {
    PolicyOptions options;

    auto sev_keyed = make_policy("ucb", options, 1);
    options.ucb_pair_arms = true;
    auto pair_keyed = make_policy("ucb", options, 1);

    // Task vehicle 7 sees candidate 1 fail once.
    TaskRound r1 = make_round(1, 1, {{1, {}}}, 7);
    sev_keyed->select(r1, 1);
    pair_keyed->select(r1, 1);
    sev_keyed->feedback(event_for(1, 1, {}, 0));
    pair_keyed->feedback(event_for(1, 1, {}, 0));
    sev_keyed->drain(0.0);
    pair_keyed->drain(0.0);

    // Same task vehicle again: both know arm 1, prefer the fresh arm 2.
    TaskRound r2 = make_round(2, 1, {{1, {}}, {2, {}}}, 7);
    CHECK(sev_keyed->select(r2, 2).decision.selected == std::vector<int>{2});
    CHECK(pair_keyed->select(r2, 2).decision.selected == std::vector<int>{2});

    // A different task vehicle: per-vehicle arms carry over, pair arms reset.
    TaskRound r3 = make_round(3, 1, {{1, {}}, {2, {}}}, 8);
    CHECK(sev_keyed->select(r3, 3).decision.selected == std::vector<int>{2});
    CHECK(pair_keyed->select(r3, 3).decision.selected == std::vector<int>{1});
}

TEST_CASE("mlinucb scores from the shared ridge model") {
    MLinUcbPolicy policy(2, 1.0);

    // Fresh state: theta = 0, A = I, so the score is the context norm.
    CHECK(policy.score({0.3, 0.4}) == doctest::Approx(0.5));
    CHECK(policy.score({1.0, 0.0}) == doctest::Approx(1.0));

    // One observation phi = e1, q = 1: A = diag(2, 1), b = (1, 0),
    // theta = (1/2, 0); score(e1) = 1/2 + sqrt(1/2).
    policy.feedback(event_for(1, 1, {1.0, 0.0}, 1));
    policy.drain(0.0);
    CHECK(policy.score({1.0, 0.0}) == doctest::Approx(0.5 + std::sqrt(0.5)));

    // With no exploration bonus the estimate alone remains: theta^T e1 = 1/2.
    MLinUcbPolicy estimate_only(2, 0.0);
    estimate_only.feedback(event_for(1, 1, {1.0, 0.0}, 1));
    estimate_only.drain(0.0);
    CHECK(estimate_only.score({1.0, 0.0}) == doctest::Approx(0.5));

    CHECK_THROWS_AS(policy.score({0.1, 0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("mlinucb selections are distinct and budget-bounded") {
    MLinUcbPolicy policy(2, 1.0);
    TaskRound round = make_round(1, 3,
                                 {{1, {0.1, 0.2}},
                                  {2, {0.9, 0.8}},
                                  {3, {0.5, 0.5}},
                                  {4, {0.3, 0.9}},
                                  {5, {0.2, 0.1}}});
    PolicyDecision d = policy.select(round, 1);
    CHECK(d.decision.selected.size() == 3);
    std::set<int> unique(d.decision.selected.begin(), d.decision.selected.end());
    CHECK(unique.size() == 3);

    // The largest-norm context wins the first slot on a fresh model.
    CHECK(unique.count(2) == 1);
}

TEST_CASE("mlinucb learns which direction pays") {
    MLinUcbPolicy policy(2, 0.1);
    // Direction e1 always succeeds, direction e2 always fails.
    for (int i = 0; i < 40; ++i) {
        policy.feedback(event_for(i, 1, {1.0, 0.0}, 1));
        policy.feedback(event_for(i, 2, {0.0, 1.0}, 0));
    }
    policy.drain(0.0);
    TaskRound round = make_round(100, 1, {{1, {1.0, 0.0}}, {2, {0.0, 1.0}}});
    CHECK(policy.select(round, 100).decision.selected == std::vector<int>{1});
}

TEST_CASE("random selection is uniform and spends the budget") {
    std::mt19937_64 rng(99);
    Task task;
    task.id = 1;
    task.budget = 1;

    std::vector<int> candidates = {1, 2, 3, 4, 5};
    std::vector<int> counts(6, 0);
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        ReplicationDecision d = random_select(task, candidates, task.budget, rng);
        REQUIRE(d.selected.size() == 1);
        counts[d.selected[0]] += 1;
    }
    // Each candidate should be hit ~2000 times; 3 sigma of Binomial(1e4, .2).
    double sigma = std::sqrt(trials * 0.2 * 0.8);
    for (int v = 1; v <= 5; ++v) CHECK(std::abs(counts[v] - 2000.0) <= 3.0 * sigma);

    // Budget covers the pool: everything selected.
    task.budget = 9;
    ReplicationDecision all = random_select(task, candidates, task.budget, rng);
    CHECK(all.selected == candidates);

    CHECK(random_select(task, {}, 3, rng).selected.empty());
}

TEST_CASE("random picks are distinct") {
    std::mt19937_64 rng(7);
    Task task;
    task.budget = 3;
    for (int i = 0; i < 200; ++i) {
        ReplicationDecision d = random_select(task, {1, 2, 3, 4, 5, 6}, 3, rng);
        REQUIRE(d.selected.size() == 3);
        std::set<int> unique(d.selected.begin(), d.selected.end());
        CHECK(unique.size() == 3);
    }
}

TEST_CASE("every policy respects the budget") {
    PolicyOptions options;
    options.learner.horizon = 1000;
    options.learner.dim = 2;

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const char* kind : {"datev", "oracle", "ucb", "mlinucb", "random"}) {
        auto policy = make_policy(kind, options, 42);
        for (std::int64_t t = 1; t <= 50; ++t) {
            int budget = 1 + static_cast<int>(rng() % 4);
            TaskRound round;
            round.task.id = t;
            round.task.budget = budget;
            int n = 2 + static_cast<int>(rng() % 7);
            for (int v = 0; v < n; ++v) {
                Candidate c;
                c.id = v;
                c.phi = {unit(rng), unit(rng)};
                c.true_mu = unit(rng);
                c.quality = unit(rng) < c.true_mu ? 1 : 0;
                round.candidates.push_back(std::move(c));
            }
            PolicyDecision d = policy->select(round, t);
            CHECK(static_cast<int>(d.decision.selected.size()) <= budget);
            std::set<int> unique(d.decision.selected.begin(), d.decision.selected.end());
            CHECK(unique.size() == d.decision.selected.size());
            for (int id : d.decision.selected) {
                CHECK(id >= 0);
                CHECK(id < n);
                FeedbackEvent ev = event_for(t, id, round.candidates[id].phi,
                                             round.candidates[id].quality);
                policy->feedback(std::move(ev));
            }
            policy->drain(1e18);
        }
        CHECK(policy->pending() == 0);
    }
}

TEST_CASE("oracle dominates every policy on expected reward") {
    PolicyOptions options;
    options.learner.horizon = 300;
    options.learner.dim = 2;
    RewardParams params = options.reward;

    SyntheticConfig cfg;
    cfg.horizon = 300;
    for (const char* kind : {"datev", "ucb", "mlinucb", "random"}) {
        SyntheticWorld world(cfg, 21);
        auto policy = make_policy(kind, options, 21);
        auto oracle = make_policy("oracle", options, 21);
        std::int64_t t = 0;
        while (auto round = world.next_round()) {
            ++t;
            QualityVector mu = round->mu_vector();
            PolicyDecision d = policy->select(*round, t);
            PolicyDecision best = oracle->select(*round, t);
            double got = expected_reward(mu, d.decision.selected, params);
            double top = expected_reward(mu, best.decision.selected, params);
            CHECK(got <= top + 1e-12);
            for (int id : d.decision.selected) {
                for (const Candidate& c : round->candidates) {
                    if (c.id != id) continue;
                    policy->feedback(event_for(round->task.id, id, c.phi, c.quality));
                }
            }
            policy->drain(1e18);
        }
    }
}

TEST_CASE("policy feedback queue orders by readiness") {
    UcbPolicy policy(false);
    FeedbackEvent late = event_for(1, 1, {}, 1);
    late.ready_time = 9.0;
    FeedbackEvent early = event_for(2, 2, {}, 1);
    early.ready_time = 5.0;
    policy.feedback(late);
    policy.feedback(early);
    CHECK(policy.pending() == 2);
    CHECK(policy.drain(6.0) == 1);  // only the early one is due
    CHECK(policy.pending() == 1);
    CHECK(policy.drain(10.0) == 1);
    CHECK(policy.pending() == 0);
}

TEST_CASE("unknown policy kinds are rejected") {
    PolicyOptions options;
    CHECK_THROWS_AS(make_policy("thompson", options, 1), std::invalid_argument);
}
