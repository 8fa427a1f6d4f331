#include "datev/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "datev/rng.hpp"
#include "datev/trace.hpp"

namespace datev {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const Candidate* candidate_by_id(const TaskRound& round, int id) {
    for (const Candidate& c : round.candidates)
        if (c.id == id) return &c;
    return nullptr;
}

}  // namespace

std::unique_ptr<World> make_world(const RunConfig& config, std::uint64_t seed) {
    if (config.mode == "synthetic") {
        SyntheticConfig world_config = config.synthetic;
        world_config.horizon = config.horizon;  // the run horizon is the task count
        world_config.dim = config.learner.dim;
        return std::make_unique<SyntheticWorld>(world_config, seed);
    }

    auto entries = load_manifest(config.trace_manifest);
    Projection projection = Projection::centered_on(config.region);
    std::vector<Vehicle> vehicles = build_vehicles(entries, config.region, projection);
    if (vehicles.empty())
        throw std::runtime_error("no usable vehicle traces inside the configured region");
    RsuLayout rsus =
        deploy_rsus(config.region, config.rsu_spacing, config.rsu_count, config.coverage_radius);

    TraceWorldConfig world_config;
    world_config.tasks = config.task_gen;
    world_config.tasks.max_tasks = config.horizon;  // the run horizon is the task count
    world_config.radio = config.radio;
    world_config.context = config.context_bounds;
    world_config.sev_fraction = config.sev_fraction;
    world_config.cpu_min = config.cpu_min;
    world_config.cpu_max = config.cpu_max;
    world_config.mc_samples = config.mc_samples;

    // The task window follows the traces' common time span.
    double t_min = 1e308, t_max = -1e308;
    for (const Vehicle& v : vehicles) {
        t_min = std::min(t_min, v.trace.front().t);
        t_max = std::max(t_max, v.trace.back().t);
    }
    world_config.tasks.start_time = t_min;
    world_config.tasks.end_time = t_max;

    return std::make_unique<TraceWorld>(world_config, std::move(vehicles), std::move(rsus), seed);
}

EpisodeLog run_single(const RunConfig& config, const std::string& policy_kind,
                      std::uint64_t seed) {
    std::unique_ptr<World> world = make_world(config, seed);

    PolicyOptions options;
    options.learner = config.learner;
    options.learner.horizon = config.horizon;
    options.reward = RewardParams{config.learner.eta};
    options.ucb_pair_arms = config.ucb_pair_arms;
    options.mlinucb_alpha = config.mlinucb_alpha;
    std::unique_ptr<Policy> policy = make_policy(policy_kind, options, seed);

    EpisodeLog log;
    log.policy = policy_kind;
    log.seed = seed;
    log.summary.policy = policy_kind;
    log.summary.seed = seed;
    RewardParams params = options.reward;

    std::int64_t t = 0;
    double cum_regret = 0.0;
    while (auto round = world->next_round()) {
        ++t;
        double now = round->task.arrival_time;
        if (config.delayed_feedback) policy->drain(now);

        PolicyDecision picked = policy->select(*round, t);
        const std::vector<int>& selected = picked.decision.selected;

        QualityVector realized;
        for (int id : selected) {
            const Candidate* c = candidate_by_id(*round, id);
            if (!c) throw std::logic_error("policy selected an unknown candidate");
            realized.set(id, static_cast<double>(c->quality));
        }
        double reward = realized_reward(realized, params);

        QualityVector mu = round->mu_vector();
        std::vector<int> ids;
        for (const Candidate& c : round->candidates) ids.push_back(c.id);
        ReplicationDecision best = greedy_select(mu, ids, round->task.budget, params);
        double oracle_u = expected_reward(mu, best.selected, params);
        double policy_u = expected_reward(mu, selected, params);
        double regret = oracle_u - policy_u;
        cum_regret += regret;

        for (int id : selected) {
            const Candidate* c = candidate_by_id(*round, id);
            FeedbackEvent ev;
            ev.task_id = round->task.id;
            ev.candidate = id;
            ev.phi = c->phi;
            ev.quality = c->quality;
            ev.ready_time = now + c->feedback_delay;
            policy->feedback(std::move(ev));
        }
        if (!config.delayed_feedback) policy->drain(std::numeric_limits<double>::infinity());

        EpisodeRecord rec;
        rec.task_id = round->task.id;
        rec.phase = picked.decision.phase;
        rec.k = static_cast<int>(selected.size());
        rec.reward = reward;
        rec.oracle_u = oracle_u;
        rec.policy_u = policy_u;
        rec.regret = regret;
        rec.cum_regret = cum_regret;
        rec.misexploit = picked.misexploitation;
        rec.sim_time = now;
        log.records.push_back(rec);

        RunSummary& s = log.summary;
        s.tasks += 1;
        s.cum_reward += reward;
        s.cum_regret = cum_regret;
        s.misexploitations += picked.misexploitation ? 1 : 0;
        switch (picked.decision.phase) {
            case Phase::Exploration: s.explorations += 1; break;
            case Phase::SemiExploration: s.semi_explorations += 1; break;
            case Phase::Exploitation: s.exploitations += 1; break;
            default: break;
        }
    }
    policy->drain(std::numeric_limits<double>::infinity());  // end-of-run flush

    RunSummary& s = log.summary;
    s.dropped = world->dropped_arrivals();
    std::int64_t window = std::min<std::int64_t>(s.window, s.tasks);
    if (window > 0) {
        double sum = 0.0;
        for (std::int64_t i = s.tasks - window; i < s.tasks; ++i) sum += log.records[i].reward;
        s.window_avg_reward = sum / static_cast<double>(window);
    }
    return log;
}

std::string episodes_csv(const EpisodeLog& log) {
    std::string out = "task_id,policy,phase,k,reward,oracle_u,policy_u,regret,cum_regret,misexploit,sim_time\n";
    for (const EpisodeRecord& r : log.records) {
        out += std::to_string(r.task_id);
        out += ',';
        out += log.policy;
        out += ',';
        out += to_string(r.phase);
        out += ',';
        out += std::to_string(r.k);
        out += ',';
        out += fmt(r.reward);
        out += ',';
        out += fmt(r.oracle_u);
        out += ',';
        out += fmt(r.policy_u);
        out += ',';
        out += fmt(r.regret);
        out += ',';
        out += fmt(r.cum_regret);
        out += ',';
        out += r.misexploit ? '1' : '0';
        out += ',';
        out += fmt(r.sim_time);
        out += '\n';
    }
    return out;
}

std::string summary_csv(const std::vector<RunSummary>& summaries) {
    std::string out =
        "policy,seed,tasks,cum_reward,avg_reward,window_avg_reward,cum_regret,"
        "misexploitations,explorations,semi_explorations,exploitations,dropped\n";
    for (const RunSummary& s : summaries) {
        double avg = s.tasks > 0 ? s.cum_reward / static_cast<double>(s.tasks) : 0.0;
        out += s.policy + ',' + std::to_string(s.seed) + ',' + std::to_string(s.tasks) + ',' +
               fmt(s.cum_reward) + ',' + fmt(avg) + ',' + fmt(s.window_avg_reward) + ',' +
               fmt(s.cum_regret) + ',' + std::to_string(s.misexploitations) + ',' +
               std::to_string(s.explorations) + ',' + std::to_string(s.semi_explorations) + ',' +
               std::to_string(s.exploitations) + ',' + std::to_string(s.dropped) + '\n';
    }
    return out;
}

std::vector<RunSummary> run_experiment(const RunConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    struct Job {
        std::string policy;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const std::string& policy : config.policies)
        for (std::uint64_t seed : config.seeds) jobs.push_back({policy, seed});

    std::vector<RunSummary> summaries(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));

    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size() || failed.load()) return;
            try {
                EpisodeLog log = run_single(config, jobs[i].policy, jobs[i].seed);
                std::filesystem::path file =
                    std::filesystem::path(out_dir) /
                    ("episodes_" + jobs[i].policy + "_" + std::to_string(jobs[i].seed) + ".csv");
                std::ofstream out(file, std::ios::binary);
                out << episodes_csv(log);
                summaries[i] = log.summary;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure.empty())
                    failure = jobs[i].policy + " seed " + std::to_string(jobs[i].seed) + ": " + e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("run failed: " + failure);

    std::ofstream out(std::filesystem::path(out_dir) / "summary.csv", std::ios::binary);
    out << summary_csv(summaries);
    return summaries;
}

std::string summarize_directory(const std::string& dir) {
    struct FileStats {
        std::string policy;
        std::string seed;
        std::int64_t tasks = 0;
        double cum_reward = 0.0;
        double cum_regret = 0.0;
        std::int64_t misexploits = 0;
        std::vector<double> rewards;
        std::map<std::int64_t, double> regret_samples;  // task index -> cum regret
    };

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("episodes_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no episode CSV files in " + dir);

    const std::vector<std::int64_t> sample_points = {10, 100, 1000, 10000, 100000, 1000000};

    std::vector<FileStats> all;
    for (const auto& file : files) {
        std::ifstream in(file);
        std::string line;
        std::getline(in, line);  // header
        FileStats stats;
        std::int64_t row = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ++row;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            if (fields.size() != 11) throw std::runtime_error(file.string() + ": malformed row");
            stats.policy = fields[1];
            stats.cum_reward += std::stod(fields[4]);
            stats.cum_regret = std::stod(fields[8]);
            stats.misexploits += (fields[9] == "1");
            stats.rewards.push_back(std::stod(fields[4]));
            for (std::int64_t p : sample_points)
                if (row == p) stats.regret_samples[p] = stats.cum_regret;
        }
        stats.tasks = row;
        std::string name = file.stem().string();  // episodes_<policy>_<seed>
        stats.seed = name.substr(name.rfind('_') + 1);
        all.push_back(std::move(stats));
    }

    std::ostringstream out;
    out << "per-run:\n";
    out << "  policy     seed  tasks   cum_reward  avg_reward  window_avg  cum_regret  misexploit\n";
    std::map<std::string, std::vector<const FileStats*>> by_policy;
    for (const FileStats& s : all) by_policy[s.policy].push_back(&s);
    for (const FileStats& s : all) {
        std::int64_t window = std::min<std::int64_t>(2000, s.tasks);
        double wsum = 0.0;
        for (std::int64_t i = s.tasks - window; i < s.tasks; ++i)
            wsum += s.rewards[static_cast<std::size_t>(i)];
        char buf[256];
        std::snprintf(buf, sizeof buf, "  %-10s %-5s %-7lld %-11.4f %-11.6f %-11.6f %-11.4f %lld\n",
                      s.policy.c_str(), s.seed.c_str(), static_cast<long long>(s.tasks),
                      s.cum_reward, s.tasks ? s.cum_reward / s.tasks : 0.0,
                      window ? wsum / window : 0.0, s.cum_regret,
                      static_cast<long long>(s.misexploits));
        out << buf;
    }
    out << "per-policy means:\n";
    for (const auto& [policy, runs] : by_policy) {
        double reward = 0.0, regret = 0.0, misexploits = 0.0;
        for (const FileStats* s : runs) {
            reward += s->cum_reward;
            regret += s->cum_regret;
            misexploits += static_cast<double>(s->misexploits);
        }
        double n = static_cast<double>(runs.size());
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "  %-10s runs=%zu  cum_reward=%.4f  cum_regret=%.4f  misexploit=%.1f\n",
                      policy.c_str(), runs.size(), reward / n, regret / n, misexploits / n);
        out << buf;
        std::ostringstream curve;
        bool any = false;
        for (std::int64_t p : sample_points) {
            double sum = 0.0;
            int count = 0;
            for (const FileStats* s : runs) {
                auto it = s->regret_samples.find(p);
                if (it != s->regret_samples.end()) {
                    sum += it->second;
                    ++count;
                }
            }
            if (count == static_cast<int>(runs.size())) {
                curve << "  t=" << p << ":" << (sum / count);
                any = true;
            }
        }
        if (any) out << "    mean cum_regret" << curve.str() << "\n";
    }
    return out.str();
}

}  // namespace datev
