#include "datev/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace datev {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Reads known keys out of one JSON object, collecting wrong-type and
// unknown-key violations instead of stopping at the first problem.
class Section {
public:
    Section(const json& obj, std::string prefix, std::vector<std::string>& errors)
        : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            errors_.push_back(prefix_ + key + ": wrong type");
        }
    }

    const json* subsection(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        if (!it->is_object()) {
            errors_.push_back(prefix_ + key + ": must be an object");
            return nullptr;
        }
        return &*it;
    }

    void finish() {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) errors_.push_back(prefix_ + key + ": unknown key");
        }
    }

private:
    const json& obj_;
    std::string prefix_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration:\n  " + join(violations, "\n  ")),
      violations_(std::move(violations)) {}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"top level must be a JSON object"});

    RunConfig cfg;
    std::vector<std::string> errors;

    Section top(root, "", errors);
    top.get("mode", cfg.mode);
    top.get("horizon", cfg.horizon);
    top.get("seeds", cfg.seeds);
    top.get("policies", cfg.policies);
    top.get("delayed_feedback", cfg.delayed_feedback);
    top.get("threads", cfg.threads);

    if (const json* learner = top.subsection("learner")) {
        Section s(*learner, "learner.", errors);
        s.get("alpha", cfg.learner.alpha);
        s.get("dim", cfg.learner.dim);
        s.get("eta", cfg.learner.eta);
        s.get("holder_const", cfg.learner.holder_const);
        s.finish();
    }

    if (const json* synthetic = top.subsection("synthetic")) {
        Section s(*synthetic, "synthetic.", errors);
        s.get("lambda", cfg.synthetic.lambda);
        s.get("sev_pool", cfg.synthetic.sev_pool);
        s.get("candidates_min", cfg.synthetic.candidates_min);
        s.get("candidates_max", cfg.synthetic.candidates_max);
        s.get("budget_min", cfg.synthetic.budget_min);
        s.get("budget_max", cfg.synthetic.budget_max);
        s.get("deadline_min", cfg.synthetic.deadline_min);
        s.get("deadline_max", cfg.synthetic.deadline_max);
        s.get("base_delay", cfg.synthetic.base_delay);
        s.get("severity_slope", cfg.synthetic.severity_slope);
        s.get("delay_spread", cfg.synthetic.delay_spread);
        s.get("severity_power", cfg.synthetic.severity_power);
        s.get("severity_jitter", cfg.synthetic.severity_jitter);
        s.finish();
    }

    if (const json* trace = top.subsection("trace")) {
        Section s(*trace, "trace.", errors);
        s.get("manifest", cfg.trace_manifest);
        s.get("rsu_count", cfg.rsu_count);
        s.get("rsu_spacing", cfg.rsu_spacing);
        s.get("coverage_radius", cfg.coverage_radius);
        s.get("sev_fraction", cfg.sev_fraction);
        s.get("cpu_min", cfg.cpu_min);
        s.get("cpu_max", cfg.cpu_max);
        s.get("mc_samples", cfg.mc_samples);
        s.get("lambda", cfg.task_gen.lambda);
        s.get("deadline_min", cfg.task_gen.deadline_min);
        s.get("deadline_max", cfg.task_gen.deadline_max);
        s.get("budget_min", cfg.task_gen.budget_min);
        s.get("budget_max", cfg.task_gen.budget_max);
        s.get("x_bits", cfg.task_gen.x_bits);
        s.get("y_bits", cfg.task_gen.y_bits);
        s.get("w_cycles", cfg.task_gen.w_cycles);
        s.get("speed_max", cfg.context_bounds.speed_max);
        s.get("distance_max", cfg.context_bounds.distance_max);
        if (const json* region = s.subsection("region")) {
            Section r(*region, "trace.region.", errors);
            r.get("lat_min", cfg.region.lat_min);
            r.get("lat_max", cfg.region.lat_max);
            r.get("lon_min", cfg.region.lon_min);
            r.get("lon_max", cfg.region.lon_max);
            r.finish();
        }
        if (const json* radio = s.subsection("radio")) {
            Section r(*radio, "trace.radio.", errors);
            r.get("tx_power", cfg.radio.tx_power);
            r.get("path_loss_exponent", cfg.radio.path_loss_exponent);
            r.get("noise", cfg.radio.noise);
            r.get("interference", cfg.radio.interference);
            r.get("sinr_threshold", cfg.radio.sinr_threshold);
            r.get("bandwidth", cfg.radio.bandwidth);
            r.get("operated_rate", cfg.radio.operated_rate);
            r.get("backhaul_rate_min", cfg.radio.backhaul_rate_min);
            r.get("backhaul_rate_max", cfg.radio.backhaul_rate_max);
            r.get("backhaul_rtt_min", cfg.radio.backhaul_rtt_min);
            r.get("backhaul_rtt_max", cfg.radio.backhaul_rtt_max);
            r.finish();
        }
        s.finish();
    }

    if (const json* ucb = top.subsection("ucb")) {
        Section s(*ucb, "ucb.", errors);
        std::string arm_key = cfg.ucb_pair_arms ? "pair" : "sev";
        s.get("arm_key", arm_key);
        if (arm_key == "sev" || arm_key == "pair")
            cfg.ucb_pair_arms = (arm_key == "pair");
        else
            errors.push_back("ucb.arm_key: must be 'sev' or 'pair'");
        s.finish();
    }

    if (const json* mlinucb = top.subsection("mlinucb")) {
        Section s(*mlinucb, "mlinucb.", errors);
        s.get("alpha", cfg.mlinucb_alpha);
        s.finish();
    }

    top.finish();

    // Cross-field wiring before the semantic checks.
    cfg.learner.horizon = cfg.horizon;
    cfg.synthetic.horizon = cfg.horizon;
    cfg.synthetic.dim = cfg.learner.dim;
    cfg.task_gen.max_tasks = cfg.horizon;

    if (cfg.mode != "synthetic" && cfg.mode != "trace")
        errors.push_back("mode: must be 'synthetic' or 'trace'");
    if (cfg.horizon < 1) errors.push_back("horizon: must be >= 1");
    if (cfg.seeds.empty()) errors.push_back("seeds: must not be empty");
    if (cfg.policies.empty()) errors.push_back("policies: must not be empty");
    for (const std::string& p : cfg.policies) {
        if (p != "datev" && p != "oracle" && p != "ucb" && p != "mlinucb" && p != "random")
            errors.push_back("policies: unknown policy '" + p + "'");
    }
    if (!(cfg.learner.alpha > 0.0)) errors.push_back("learner.alpha: must be > 0");
    if (cfg.learner.dim < 1) errors.push_back("learner.dim: must be >= 1");
    if (cfg.learner.eta < 0.0 || cfg.learner.eta >= 1.0)
        errors.push_back("learner.eta: must be in [0, 1)");
    if (cfg.threads < 0) errors.push_back("threads: must be >= 0");

    if (cfg.mode == "synthetic") {
        const SyntheticConfig& s = cfg.synthetic;
        if (cfg.learner.dim < 2) errors.push_back("learner.dim: synthetic mode needs >= 2");
        if (!(s.lambda > 0.0)) errors.push_back("synthetic.lambda: must be > 0");
        if (s.candidates_min < 1 || s.candidates_min > s.candidates_max)
            errors.push_back("synthetic.candidates_min/max: need 1 <= min <= max");
        if (s.budget_min < 1 || s.budget_min > s.budget_max)
            errors.push_back("synthetic.budget_min/max: need 1 <= min <= max");
        if (s.sev_pool < s.candidates_max)
            errors.push_back("synthetic.sev_pool: must be >= candidates_max");
        if (!(s.deadline_min > 0.0) || s.deadline_min > s.deadline_max)
            errors.push_back("synthetic.deadline_min/max: need 0 < min <= max");
        if (!(s.delay_spread > 0.0)) errors.push_back("synthetic.delay_spread: must be > 0");
        if (!(s.severity_power > 0.0)) errors.push_back("synthetic.severity_power: must be > 0");
        if (s.severity_jitter < 0.0) errors.push_back("synthetic.severity_jitter: must be >= 0");
    } else if (cfg.mode == "trace") {
        if (cfg.trace_manifest.empty()) errors.push_back("trace.manifest: required in trace mode");
        if (cfg.learner.dim != 4)
            errors.push_back("learner.dim: trace contexts have 4 coordinates");
        if (cfg.region.lat_min >= cfg.region.lat_max)
            errors.push_back("trace.region: lat_min must be < lat_max");
        if (cfg.region.lon_min >= cfg.region.lon_max)
            errors.push_back("trace.region: lon_min must be < lon_max");
        if (cfg.rsu_count < 1) errors.push_back("trace.rsu_count: must be >= 1");
        if (!(cfg.rsu_spacing > 0.0)) errors.push_back("trace.rsu_spacing: must be > 0");
        if (!(cfg.coverage_radius > 0.0)) errors.push_back("trace.coverage_radius: must be > 0");
        if (cfg.sev_fraction <= 0.0 || cfg.sev_fraction >= 1.0)
            errors.push_back("trace.sev_fraction: must be in (0, 1)");
        if (!(cfg.cpu_min > 0.0) || cfg.cpu_min > cfg.cpu_max)
            errors.push_back("trace.cpu_min/max: need 0 < min <= max");
        if (cfg.mc_samples < 1) errors.push_back("trace.mc_samples: must be >= 1");
        if (!(cfg.task_gen.lambda > 0.0)) errors.push_back("trace.lambda: must be > 0");
        if (cfg.task_gen.budget_min < 1 || cfg.task_gen.budget_min > cfg.task_gen.budget_max)
            errors.push_back("trace.budget_min/max: need 1 <= min <= max");
        if (!(cfg.task_gen.deadline_min > 0.0) ||
            cfg.task_gen.deadline_min > cfg.task_gen.deadline_max)
            errors.push_back("trace.deadline_min/max: need 0 < min <= max");
    }
    cfg.context_bounds.deadline_min = cfg.task_gen.deadline_min;
    cfg.context_bounds.deadline_max = cfg.task_gen.deadline_max;

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string default_config_json() {
    RunConfig d;
    json root = {
        {"mode", d.mode},
        {"horizon", d.horizon},
        {"seeds", d.seeds},
        {"policies", d.policies},
        {"delayed_feedback", d.delayed_feedback},
        {"threads", d.threads},
        {"learner",
         {{"alpha", d.learner.alpha}, {"dim", d.learner.dim}, {"eta", d.learner.eta},
          {"holder_const", d.learner.holder_const}}},
        {"synthetic",
         {{"lambda", d.synthetic.lambda},
          {"sev_pool", d.synthetic.sev_pool},
          {"candidates_min", d.synthetic.candidates_min},
          {"candidates_max", d.synthetic.candidates_max},
          {"budget_min", d.synthetic.budget_min},
          {"budget_max", d.synthetic.budget_max},
          {"deadline_min", d.synthetic.deadline_min},
          {"deadline_max", d.synthetic.deadline_max},
          {"base_delay", d.synthetic.base_delay},
          {"severity_slope", d.synthetic.severity_slope},
          {"delay_spread", d.synthetic.delay_spread},
          {"severity_power", d.synthetic.severity_power},
          {"severity_jitter", d.synthetic.severity_jitter}}},
        {"trace",
         {{"manifest", d.trace_manifest},
          {"region",
           {{"lat_min", d.region.lat_min},
            {"lat_max", d.region.lat_max},
            {"lon_min", d.region.lon_min},
            {"lon_max", d.region.lon_max}}},
          {"rsu_count", d.rsu_count},
          {"rsu_spacing", d.rsu_spacing},
          {"coverage_radius", d.coverage_radius},
          {"sev_fraction", d.sev_fraction},
          {"cpu_min", d.cpu_min},
          {"cpu_max", d.cpu_max},
          {"mc_samples", d.mc_samples},
          {"lambda", d.task_gen.lambda},
          {"deadline_min", d.task_gen.deadline_min},
          {"deadline_max", d.task_gen.deadline_max},
          {"budget_min", d.task_gen.budget_min},
          {"budget_max", d.task_gen.budget_max},
          {"x_bits", d.task_gen.x_bits},
          {"y_bits", d.task_gen.y_bits},
          {"w_cycles", d.task_gen.w_cycles},
          {"speed_max", d.context_bounds.speed_max},
          {"distance_max", d.context_bounds.distance_max},
          {"radio",
           {{"tx_power", d.radio.tx_power},
            {"path_loss_exponent", d.radio.path_loss_exponent},
            {"noise", d.radio.noise},
            {"interference", d.radio.interference},
            {"sinr_threshold", d.radio.sinr_threshold},
            {"bandwidth", d.radio.bandwidth},
            {"operated_rate", d.radio.operated_rate},
            {"backhaul_rate_min", d.radio.backhaul_rate_min},
            {"backhaul_rate_max", d.radio.backhaul_rate_max},
            {"backhaul_rtt_min", d.radio.backhaul_rtt_min},
            {"backhaul_rtt_max", d.radio.backhaul_rtt_max}}}}},
        {"ucb", {{"arm_key", d.ucb_pair_arms ? "pair" : "sev"}}},
        {"mlinucb", {{"alpha", d.mlinucb_alpha}}},
    };
    return root.dump(2) + "\n";
}

}  // namespace datev
