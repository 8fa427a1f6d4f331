#include "datev/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "datev/rng.hpp"

namespace datev {

namespace {

double planar_distance(double ax, double ay, double bx, double by) {
    return std::hypot(ax - bx, ay - by);
}

// Radio distances below a millimeter are clamped so co-located endpoints do
// not blow up the path-loss term.
constexpr double kMinRadioDistance = 1e-3;

double link_rate(const RadioParams& radio, double distance) {
    return shannon_rate(radio, sinr(radio, std::max(distance, kMinRadioDistance)));
}

}  // namespace

bool Vehicle::covers_time(double t) const {
    return !trace.empty() && t >= trace.front().t && t <= trace.back().t;
}

TimedPosition Vehicle::position_at(double t) const {
    if (!covers_time(t))
        throw DeliveryError("vehicle " + std::to_string(id) + " has no position at time " +
                            std::to_string(t));
    auto it = std::lower_bound(trace.begin(), trace.end(), t,
                               [](const TimedPosition& p, double v) { return p.t < v; });
    if (it == trace.begin()) return *it;
    if (it == trace.end() || it->t > t) {
        const TimedPosition& a = *(it - 1);
        const TimedPosition& b = (it == trace.end()) ? *(it - 1) : *it;
        if (b.t <= a.t) return a;
        double w = (t - a.t) / (b.t - a.t);
        return {t, a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)};
    }
    return *it;
}

double Vehicle::speed_at(double t) const {
    if (!covers_time(t) || trace.size() < 2) return 0.0;
    auto it = std::lower_bound(trace.begin(), trace.end(), t,
                               [](const TimedPosition& p, double v) { return p.t < v; });
    if (it == trace.begin()) ++it;
    if (it == trace.end()) --it;
    const TimedPosition& a = *(it - 1);
    const TimedPosition& b = *it;
    if (b.t <= a.t) return 0.0;
    return planar_distance(a.x, a.y, b.x, b.y) / (b.t - a.t);
}

int RsuLayout::nearest_covering(double x, double y) const {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        double d = planar_distance(x, y, positions[i].first, positions[i].second);
        if (d <= coverage_radius && d < best_dist) {  // ties keep the first unit
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

double sinr(const RadioParams& radio, double distance) {
    if (!(distance > 0.0)) throw std::invalid_argument("sinr distance must be positive");
    return radio.tx_power * std::pow(distance, -radio.path_loss_exponent) /
           (radio.noise + radio.interference);
}

double shannon_rate(const RadioParams& radio, double sinr_value) {
    if (sinr_value < 0.0) throw std::invalid_argument("sinr must be non-negative");
    return radio.bandwidth * std::log2(1.0 + sinr_value);
}

int realize_quality(const DelayBreakdown& delay, double deadline) {
    return delay.total() <= deadline ? 1 : 0;
}

std::vector<int> available_sevs(const std::pair<double, double>& rsu_position,
                                const std::vector<Vehicle>& vehicles, double time,
                                const RadioParams& radio, double coverage_radius,
                                int exclude_vehicle) {
    std::vector<int> out;
    for (const Vehicle& v : vehicles) {
        if (!v.is_sev || v.id == exclude_vehicle || !v.covers_time(time)) continue;
        TimedPosition pos = v.position_at(time);
        double dist = planar_distance(pos.x, pos.y, rsu_position.first, rsu_position.second);
        if (dist > coverage_radius) continue;
        if (sinr(radio, std::max(dist, kMinRadioDistance)) >= radio.sinr_threshold)
            out.push_back(v.id);
    }
    return out;
}

namespace {

struct ChainPrefix {
    DelayBreakdown delays;  // everything except d_rr
    bool needs_backhaul = false;
};

// Deterministic part of the delay chain; d_rr is left 0 and flagged.
ChainPrefix delay_chain(const Task& task, const Vehicle& sev, const Vehicle& tav,
                        const RsuLayout& rsus, const RadioParams& radio) {
    ChainPrefix chain;
    TimedPosition tav_at_arrival = tav.position_at(task.arrival_time);
    int serving = rsus.nearest_covering(tav_at_arrival.x, tav_at_arrival.y);
    if (serving < 0) throw DeliveryError("no roadside unit covers the task vehicle at arrival");

    const auto& serving_pos = rsus.positions[serving];
    double up_dist = planar_distance(tav_at_arrival.x, tav_at_arrival.y, serving_pos.first,
                                     serving_pos.second);
    chain.delays.d_tr = task.x_bits / link_rate(radio, up_dist);
    chain.delays.d_rs = task.x_bits / radio.operated_rate;
    chain.delays.d_c = task.w_cycles / sev.cpu_frequency;

    double return_time = task.arrival_time + chain.delays.d_tr + chain.delays.d_rs + chain.delays.d_c;
    TimedPosition sev_then = sev.position_at(return_time);
    TimedPosition tav_then = tav.position_at(return_time);
    int s_rsu = rsus.nearest_covering(sev_then.x, sev_then.y);
    int t_rsu = rsus.nearest_covering(tav_then.x, tav_then.y);
    if (s_rsu < 0) throw DeliveryError("no roadside unit covers the server vehicle at return");
    if (t_rsu < 0) throw DeliveryError("no roadside unit covers the task vehicle at return");

    double down_dist = planar_distance(sev_then.x, sev_then.y, rsus.positions[s_rsu].first,
                                       rsus.positions[s_rsu].second);
    chain.delays.d_sr = task.y_bits / link_rate(radio, down_dist);
    chain.delays.d_rt = task.y_bits / radio.operated_rate;
    chain.needs_backhaul = (s_rsu != t_rsu);
    return chain;
}

double draw_backhaul(double y_bits, const RadioParams& radio, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rate(radio.backhaul_rate_min, radio.backhaul_rate_max);
    std::uniform_real_distribution<double> rtt(radio.backhaul_rtt_min, radio.backhaul_rtt_max);
    double g = rate(rng);
    double h = rtt(rng);
    return y_bits / g + h;
}

}  // namespace

DelayBreakdown service_delay(const Task& task, const Vehicle& sev, const Vehicle& tav,
                             const RsuLayout& rsus, const RadioParams& radio,
                             std::mt19937_64& rng) {
    ChainPrefix chain = delay_chain(task, sev, tav, rsus, radio);
    if (chain.needs_backhaul) chain.delays.d_rr = draw_backhaul(task.y_bits, radio, rng);
    return chain.delays;
}

TaskStream generate_tasks(const TaskGenConfig& config, const std::vector<Vehicle>& vehicles,
                          const RsuLayout& rsus, std::mt19937_64& rng) {
    if (!(config.lambda > 0.0)) throw std::invalid_argument("arrival rate must be positive");
    TaskStream stream;
    std::exponential_distribution<double> gap(config.lambda);
    std::uniform_real_distribution<double> deadline(config.deadline_min, config.deadline_max);
    std::uniform_int_distribution<int> budget(config.budget_min, config.budget_max);

    double now = config.start_time;
    while (static_cast<std::int64_t>(stream.tasks.size()) < config.max_tasks) {
        now += gap(rng);
        if (now > config.end_time) break;

        std::vector<int> eligible;
        for (const Vehicle& v : vehicles) {
            if (v.is_sev || !v.covers_time(now)) continue;
            TimedPosition pos = v.position_at(now);
            if (rsus.nearest_covering(pos.x, pos.y) >= 0) eligible.push_back(v.id);
        }
        if (eligible.empty()) {
            stream.dropped += 1;
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
        Task task;
        task.id = static_cast<std::int64_t>(stream.tasks.size()) + 1;
        task.x_bits = config.x_bits;
        task.y_bits = config.y_bits;
        task.w_cycles = config.w_cycles;
        task.tav_id = eligible[pick(rng)];
        task.deadline = deadline(rng);
        task.budget = budget(rng);
        task.arrival_time = now;
        stream.tasks.push_back(task);
    }
    return stream;
}

ContextVector context_of(const Task& task, const Vehicle& sev, const Vehicle& tav, double time,
                         const ContextBounds& bounds) {
    auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    TimedPosition sp = sev.position_at(time);
    TimedPosition tp = tav.position_at(time);
    double deadline_span = bounds.deadline_max - bounds.deadline_min;
    return {
        clamp01(tav.speed_at(time) / bounds.speed_max),
        clamp01(sev.speed_at(time) / bounds.speed_max),
        clamp01(planar_distance(sp.x, sp.y, tp.x, tp.y) / bounds.distance_max),
        deadline_span > 0.0 ? clamp01((task.deadline - bounds.deadline_min) / deadline_span) : 0.0,
    };
}

std::vector<std::pair<int, ContextVector>> TaskRound::candidate_views() const {
    std::vector<std::pair<int, ContextVector>> views;
    views.reserve(candidates.size());
    for (const Candidate& c : candidates) views.emplace_back(c.id, c.phi);
    return views;
}

QualityVector TaskRound::mu_vector() const {
    QualityVector mu;
    for (const Candidate& c : candidates) mu.set(c.id, c.true_mu);
    return mu;
}

SyntheticWorld::SyntheticWorld(SyntheticConfig config, std::uint64_t seed)
    : config_(config), seed_(seed), arrival_rng_(mix_seed({seed, 0xA221'11A1ULL})) {
    if (config_.dim < 2) throw std::invalid_argument("synthetic contexts need at least 2 dimensions");
    if (config_.sev_pool < config_.candidates_max)
        throw std::invalid_argument("server pool smaller than the candidate count");
    sev_severity_.resize(config_.sev_pool);
    for (int v = 0; v < config_.sev_pool; ++v) {
        std::mt19937_64 rng(mix_seed({seed, 0x5E4E'0001ULL, static_cast<std::uint64_t>(v)}));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        sev_severity_[v] = std::pow(unit(rng), config_.severity_power);
    }
}

double SyntheticWorld::true_mu_of(const ContextVector& phi) const {
    double span = config_.deadline_max - config_.deadline_min;
    double deadline = config_.deadline_min + phi[1] * span;
    double onset = config_.base_delay + config_.severity_slope * phi[0];
    double mu = (deadline - onset) / config_.delay_spread;
    return std::min(1.0, std::max(0.0, mu));
}

double SyntheticWorld::smoothness_bound() const {
    double span = config_.deadline_max - config_.deadline_min;
    return std::hypot(config_.severity_slope / config_.delay_spread,
                      span / config_.delay_spread);
}

std::optional<TaskRound> SyntheticWorld::next_round() {
    if (emitted_ >= config_.horizon) return std::nullopt;
    std::int64_t index = emitted_++;
    std::exponential_distribution<double> gap(config_.lambda);
    clock_ += gap(arrival_rng_);

    // All task content comes from a per-task stream keyed by (seed, index), so
    // it is invariant to the arrival rate and shared across policies.
    std::mt19937_64 rng(mix_seed({seed_, 0xC047'E57ULL, static_cast<std::uint64_t>(index)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TaskRound round;
    round.task.id = index + 1;
    round.task.arrival_time = clock_;
    double span = config_.deadline_max - config_.deadline_min;
    round.task.deadline = config_.deadline_min + unit(rng) * span;
    round.task.budget =
        std::uniform_int_distribution<int>(config_.budget_min, config_.budget_max)(rng);
    int n_candidates =
        std::uniform_int_distribution<int>(config_.candidates_min, config_.candidates_max)(rng);
    round.task.tav_id = std::uniform_int_distribution<int>(0, 15)(rng);

    std::vector<int> pool(config_.sev_pool);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n_candidates; ++i) {
        std::uniform_int_distribution<int> pick(i, config_.sev_pool - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }

    double phi2 = span > 0.0 ? (round.task.deadline - config_.deadline_min) / span : 0.0;
    for (int i = 0; i < n_candidates; ++i) {
        Candidate cand;
        cand.id = pool[i];
        double jitter = config_.severity_jitter * (2.0 * unit(rng) - 1.0);
        double severity = std::min(1.0, std::max(0.0, sev_severity_[cand.id] + jitter));
        cand.phi = {severity, phi2};
        for (int d = 2; d < config_.dim; ++d) cand.phi.push_back(unit(rng));
        cand.true_mu = true_mu_of(cand.phi);

        double onset = config_.base_delay + config_.severity_slope * severity;
        double delay = onset + config_.delay_spread * unit(rng);
        cand.quality = delay <= round.task.deadline ? 1 : 0;
        cand.feedback_delay = cand.quality ? delay : round.task.deadline;
        round.candidates.push_back(std::move(cand));
    }
    return round;
}

TraceWorld::TraceWorld(TraceWorldConfig config, std::vector<Vehicle> vehicles, RsuLayout rsus,
                       std::uint64_t seed)
    : config_(config), vehicles_(std::move(vehicles)), rsus_(std::move(rsus)), seed_(seed) {
    for (Vehicle& v : vehicles_) {
        std::mt19937_64 rng(mix_seed({seed, 0x401E'5ULL, static_cast<std::uint64_t>(v.id)}));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        v.is_sev = unit(rng) < config_.sev_fraction;
        v.cpu_frequency = config_.cpu_min + unit(rng) * (config_.cpu_max - config_.cpu_min);
    }
    std::mt19937_64 task_rng(mix_seed({seed, 0x7A5C'57ULL}));
    stream_ = generate_tasks(config_.tasks, vehicles_, rsus_, task_rng);
}

std::optional<TaskRound> TraceWorld::next_round() {
    if (cursor_ >= stream_.tasks.size()) return std::nullopt;
    TaskRound round;
    round.task = stream_.tasks[cursor_++];
    const Task& task = round.task;

    auto vehicle_by_id = [&](int id) -> const Vehicle& {
        for (const Vehicle& v : vehicles_)
            if (v.id == id) return v;
        throw std::logic_error("unknown vehicle id " + std::to_string(id));
    };
    const Vehicle& tav = vehicle_by_id(task.tav_id);
    TimedPosition tav_pos = tav.position_at(task.arrival_time);
    int serving = rsus_.nearest_covering(tav_pos.x, tav_pos.y);
    if (serving < 0) return round;  // generate_tasks guarantees coverage; defensive

    std::vector<int> sev_ids =
        available_sevs(rsus_.positions[serving], vehicles_, task.arrival_time, config_.radio,
                       rsus_.coverage_radius, task.tav_id);
    for (int sev_id : sev_ids) {
        const Vehicle& sev = vehicle_by_id(sev_id);
        Candidate cand;
        cand.id = sev_id;
        cand.phi = context_of(task, sev, tav, task.arrival_time, config_.context);
        try {
            ChainPrefix chain = delay_chain(task, sev, tav, rsus_, config_.radio);
            std::mt19937_64 realize_rng(mix_seed({seed_, 0xDE1A'1ULL,
                                                  static_cast<std::uint64_t>(task.id),
                                                  static_cast<std::uint64_t>(sev_id)}));
            DelayBreakdown delays = chain.delays;
            if (chain.needs_backhaul)
                delays.d_rr = draw_backhaul(task.y_bits, config_.radio, realize_rng);
            cand.quality = realize_quality(delays, task.deadline);
            cand.feedback_delay = cand.quality ? delays.total() : task.deadline;

            if (!chain.needs_backhaul) {
                cand.true_mu = static_cast<double>(realize_quality(chain.delays, task.deadline));
            } else {
                std::mt19937_64 mc_rng(mix_seed({seed_, 0x0E7'0ULL,
                                                 static_cast<std::uint64_t>(task.id),
                                                 static_cast<std::uint64_t>(sev_id)}));
                int hits = 0;
                double fixed = chain.delays.total();
                for (int s = 0; s < config_.mc_samples; ++s) {
                    double total = fixed + draw_backhaul(task.y_bits, config_.radio, mc_rng);
                    if (total <= task.deadline) ++hits;
                }
                cand.true_mu = static_cast<double>(hits) / config_.mc_samples;
            }
        } catch (const DeliveryError&) {
            cand.true_mu = 0.0;
            cand.quality = 0;
            cand.feedback_delay = task.deadline;
        }
        round.candidates.push_back(std::move(cand));
    }
    return round;
}

}  // namespace datev
