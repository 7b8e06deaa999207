#include "tensorrl/harness.hpp"

#include "tensorrl/mdp_gen.hpp"
#include "tensorrl/seeding.hpp"
#include "tensorrl/tensor_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tensorrl {

namespace fs = std::filesystem;

std::string to_string(ExperimentId id) { return id == ExperimentId::rank5 ? "rank5" : "degenerate"; }

ExperimentId parse_experiment(const std::string& name) {
    if (name == "rank5") return ExperimentId::rank5;
    if (name == "degenerate") return ExperimentId::degenerate;
    throw std::invalid_argument("unknown experiment '" + name + "' (expected rank5 or degenerate)");
}

std::string AgentSpec::label() const {
    AgentConfig c;
    c.kind = kind;
    c.transition_rank = c.reward_rank = rank;
    return c.label();
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) throw std::invalid_argument("bad integer for '" + key + "': " + text);
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) throw std::invalid_argument("bad integer for '" + key + "': " + text);
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    try {
        return parse_double(text);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for '" + key + "': " + text);
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

AgentSpec parse_agent(const std::string& label) {
    if (label == "baseline") return {AgentKind::baseline, 0};
    auto ranked = [&](std::string_view prefix, AgentKind kind) -> std::optional<AgentSpec> {
        if (label.rfind(prefix, 0) != 0) return std::nullopt;
        const std::string rest = label.substr(prefix.size());
        const std::size_t r = parse_size("agents", rest);
        if (r == 0) throw std::invalid_argument("agent rank must be positive: " + label);
        return AgentSpec{kind, r};
    };
    if (auto a = ranked("full-cp-", AgentKind::full_cp)) return *a;
    if (auto a = ranked("tesseract-", AgentKind::tesseract)) return *a;
    throw std::invalid_argument("unknown agent '" + label + "'");
}

void ExperimentConfig::validate() const {
    if (agents.empty()) throw std::invalid_argument("agent roster is empty");
    for (std::size_t i = 0; i < agents.size(); ++i)
        for (std::size_t j = i + 1; j < agents.size(); ++j)
            if (agents[i] == agents[j]) throw std::invalid_argument("duplicate agent " + agents[i].label());
    if (n_episodes < 1 || n_train < 1) throw std::invalid_argument("n_episodes and n_train must be at least 1");
    if (n_episodes % n_train != 0) throw std::invalid_argument("n_train must divide n_episodes");
    if (episode_length < 1) throw std::invalid_argument("episode_length must be at least 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw std::invalid_argument("epsilon endpoints must lie in [0, 1]");
    if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (eval_episodes < 1 || optimal_episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
    if (completion_clamp && !(*completion_clamp > 0.0)) throw std::invalid_argument("completion_clamp must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    DecompConfig t = transition_decomp, r = reward_decomp;
    t.validate();
    r.validate();
}

ExperimentConfig default_config(ExperimentId id) {
    ExperimentConfig c;
    c.experiment = id;
    c.transition_decomp.power_max_iters = 50;
    c.transition_decomp.altmin_max_sweeps = 20;
    c.transition_decomp.altmin_tolerance = 1e-6;
    c.reward_decomp.power_max_iters = 200;
    c.reward_decomp.altmin_max_sweeps = 200;
    if (id == ExperimentId::rank5) {
        c.agents = {{AgentKind::baseline, 0},  {AgentKind::full_cp, 3},   {AgentKind::full_cp, 5},
                    {AgentKind::full_cp, 10}, {AgentKind::tesseract, 1}, {AgentKind::tesseract, 5}};
    } else {
        c.transition_decomp.power_max_iters = 20;
        c.transition_decomp.altmin_max_sweeps = 10;
        c.agents = {{AgentKind::baseline, 0},
                    {AgentKind::full_cp, 4},
                    {AgentKind::full_cp, 8},
                    {AgentKind::tesseract, 1},
                    {AgentKind::tesseract, 4}};
    }
    return c;
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

void decomp_keys(std::map<std::string, Setter>& m, const std::string& prefix, DecompConfig ExperimentConfig::*field) {
    m[prefix + "power_tolerance"] = [field](auto& c, auto& k, auto& v) { (c.*field).power_tolerance = parse_real(k, v); };
    m[prefix + "power_max_iters"] = [field](auto& c, auto& k, auto& v) { (c.*field).power_max_iters = parse_size(k, v); };
    m[prefix + "altmin_max_sweeps"] = [field](auto& c, auto& k, auto& v) {
        (c.*field).altmin_max_sweeps = parse_size(k, v);
    };
    m[prefix + "altmin_tolerance"] = [field](auto& c, auto& k, auto& v) {
        (c.*field).altmin_tolerance = parse_real(k, v);
    };
    m[prefix + "max_restarts"] = [field](auto& c, auto& k, auto& v) { (c.*field).max_restarts = parse_size(k, v); };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        m["experiment"] = [](auto& c, auto&, auto& v) { c.experiment = parse_experiment(v); };
        m["agents"] = [](auto& c, auto&, auto& v) {
            c.agents.clear();
            for (const auto& a : split_list(v)) c.agents.push_back(parse_agent(a));
        };
        m["n_episodes"] = [](auto& c, auto& k, auto& v) { c.n_episodes = parse_size(k, v); };
        m["n_train"] = [](auto& c, auto& k, auto& v) { c.n_train = parse_size(k, v); };
        m["episode_length"] = [](auto& c, auto& k, auto& v) { c.episode_length = parse_size(k, v); };
        m["epsilon_start"] = [](auto& c, auto& k, auto& v) { c.epsilon_start = parse_real(k, v); };
        m["epsilon_end"] = [](auto& c, auto& k, auto& v) { c.epsilon_end = parse_real(k, v); };
        m["discount"] = [](auto& c, auto& k, auto& v) { c.discount = parse_real(k, v); };
        m["n_improvement_iter"] = [](auto& c, auto& k, auto& v) { c.n_improvement_iter = parse_size(k, v); };
        m["repetitions"] = [](auto& c, auto& k, auto& v) { c.repetitions = parse_size(k, v); };
        m["base_seed"] = [](auto& c, auto& k, auto& v) { c.base_seed = parse_u64(k, v); };
        m["eval_episodes"] = [](auto& c, auto& k, auto& v) { c.eval_episodes = parse_size(k, v); };
        m["optimal_episodes"] = [](auto& c, auto& k, auto& v) { c.optimal_episodes = parse_size(k, v); };
        m["completion_clamp"] = [](auto& c, auto& k, auto& v) {
            if (v == "none")
                c.completion_clamp.reset();
            else
                c.completion_clamp = parse_real(k, v);
        };
        m["threads"] = [](auto& c, auto& k, auto& v) { c.threads = parse_size(k, v); };
        decomp_keys(m, "transition_", &ExperimentConfig::transition_decomp);
        decomp_keys(m, "reward_", &ExperimentConfig::reward_decomp);
        return m;
    }();
    return table;
}

} // namespace

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        try {
            apply_config_value(base, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const fs::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_config(in, std::move(base));
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "experiment = " << to_string(cfg.experiment) << '\n';
    os << "agents = ";
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) os << (i ? ", " : "") << cfg.agents[i].label();
    os << '\n';
    os << "n_episodes = " << cfg.n_episodes << '\n';
    os << "n_train = " << cfg.n_train << '\n';
    os << "episode_length = " << cfg.episode_length << '\n';
    os << "epsilon_start = " << format_double(cfg.epsilon_start) << '\n';
    os << "epsilon_end = " << format_double(cfg.epsilon_end) << '\n';
    os << "discount = " << format_double(cfg.discount) << '\n';
    os << "n_improvement_iter = " << cfg.n_improvement_iter << '\n';
    os << "repetitions = " << cfg.repetitions << '\n';
    os << "base_seed = " << cfg.base_seed << '\n';
    os << "eval_episodes = " << cfg.eval_episodes << '\n';
    os << "optimal_episodes = " << cfg.optimal_episodes << '\n';
    for (const auto& [prefix, d] : {std::pair{"transition_", &cfg.transition_decomp},
                                     std::pair{"reward_", &cfg.reward_decomp}}) {
        os << prefix << "power_tolerance = " << format_double(d->power_tolerance) << '\n';
        os << prefix << "power_max_iters = " << d->power_max_iters << '\n';
        os << prefix << "altmin_max_sweeps = " << d->altmin_max_sweeps << '\n';
        os << prefix << "altmin_tolerance = " << format_double(d->altmin_tolerance) << '\n';
        os << prefix << "max_restarts = " << d->max_restarts << '\n';
    }
    os << "completion_clamp = " << (cfg.completion_clamp ? format_double(*cfg.completion_clamp) : "none") << '\n';
    os << "threads = " << cfg.threads << '\n';
    return os.str();
}

double epsilon(std::size_t episode, const ExperimentConfig& cfg) {
    if (cfg.n_episodes <= 1) return cfg.epsilon_start;
    const double frac = static_cast<double>(episode > 0 ? episode - 1 : 0) / static_cast<double>(cfg.n_episodes - 1);
    const double e = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
    const double lo = std::min(cfg.epsilon_start, cfg.epsilon_end);
    const double hi = std::max(cfg.epsilon_start, cfg.epsilon_end);
    return std::clamp(e, lo, hi);
}

void run_episode(const TabularMDP& mdp, const Policy& pi, double eps, std::size_t episode_length,
                 ExperienceStore& store, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> start(0, mdp.n_states() - 1);
    std::uniform_int_distribution<std::size_t> any_action(0, mdp.joint_action_count() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::size_t s = start(rng);
    for (std::size_t t = 0; t < episode_length; ++t) {
        const std::size_t a = coin(rng) < eps ? any_action(rng) : pi.action[s];
        const StepResult r = step(mdp, s, a, rng);
        store.record(s, a, r.reward, r.next_state);
        s = r.next_state;
    }
}

double evaluate(const TabularMDP& mdp, const Policy& pi, std::size_t eval_episodes, std::size_t episode_length,
                std::mt19937_64& rng) {
    return rollout_return(mdp, pi, eval_episodes, episode_length, rng);
}

std::uint64_t repetition_seed(const ExperimentConfig& cfg, std::size_t rep) { return cfg.base_seed + rep; }

TabularMDP build_experiment_mdp(ExperimentId id, std::uint64_t seed, double discount) {
    return id == ExperimentId::rank5 ? build_experiment1_mdp(seed, discount) : build_degenerate_mdp(seed, discount);
}

namespace {

double squared_error(const DenseTensor& a, const DenseTensor& b) {
    const double d = frobenius_distance(a, b);
    return d * d;
}

} // namespace

RunResult run_repetition(const ExperimentConfig& cfg, std::size_t rep, const std::optional<fs::path>& dump_dir) {
    cfg.validate();
    RunResult result;
    result.repetition = rep;
    result.seed = repetition_seed(cfg, rep);
    const TabularMDP mdp = build_experiment_mdp(cfg.experiment, result.seed, cfg.discount);

    ReturnProtocol protocol;
    protocol.seed = derive_seed(result.seed, {4});
    protocol.episodes = cfg.optimal_episodes;
    protocol.episode_length = cfg.episode_length;
    result.optimal_return = optimal_policy(mdp, protocol).expected_return;

    const std::size_t checkpoints = cfg.checkpoint_count();
    std::vector<std::vector<MetricsRow>> per_agent(cfg.agents.size());
    for (std::size_t ai = 0; ai < cfg.agents.size(); ++ai) {
        AgentConfig acfg;
        acfg.kind = cfg.agents[ai].kind;
        acfg.transition_rank = acfg.reward_rank = cfg.agents[ai].rank;
        acfg.transition_decomp = cfg.transition_decomp;
        acfg.reward_decomp = cfg.reward_decomp;
        acfg.completion.max_abs_weight = cfg.completion_clamp;
        acfg.n_improvement_iter = cfg.n_improvement_iter;

        std::mt19937_64 explore(derive_seed(result.seed, {5, ai}));
        Policy pi = random_policy(mdp, explore);
        ExperienceStore store(mdp.n_states(), mdp.action_sizes());
        ModelEstimate model;
        for (std::size_t ep = 1; ep <= cfg.n_episodes; ++ep) {
            run_episode(mdp, pi, epsilon(ep, cfg), cfg.episode_length, store, explore);
            if (ep % cfg.n_train != 0) continue;
            acfg.seed = derive_seed(result.seed, {6, ai, ep});
            model = fit_model(store, acfg);
            pi = plan(model, pi, acfg, mdp.n_states(), mdp.action_sizes(), mdp.discount());

            // Every agent is evaluated on the same rollout stream at a checkpoint.
            std::mt19937_64 eval_rng(derive_seed(result.seed, {7, ep}));
            MetricsRow row;
            row.episode = ep;
            row.agent = cfg.agents[ai].label();
            row.regret = evaluate(mdp, pi, cfg.eval_episodes, cfg.episode_length, eval_rng) - result.optimal_return;
            row.reward_sse = squared_error(model.reward, mdp.reward());
            row.transition_mse =
                squared_error(model.transition, mdp.transition()) / static_cast<double>(mdp.transition().size());
            row.unique_visited = static_cast<double>(store.unique_visited());
            per_agent[ai].push_back(std::move(row));
        }
        if (dump_dir) {
            const fs::path d = *dump_dir / ("run" + std::to_string(rep));
            fs::create_directories(d);
            save_tensor(d / (cfg.agents[ai].label() + "_transition.txt"), model.transition);
            save_tensor(d / (cfg.agents[ai].label() + "_reward.txt"), model.reward);
        }
    }
    for (std::size_t c = 0; c < checkpoints; ++c)
        for (auto& rows : per_agent) result.rows.push_back(rows[c]);
    return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& dump_dir) {
    cfg.validate();
    std::vector<RunResult> runs(cfg.repetitions);
    std::vector<std::exception_ptr> errors(cfg.repetitions);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t rep; (rep = next.fetch_add(1)) < cfg.repetitions;) {
            try {
                runs[rep] = run_repetition(cfg, rep, dump_dir);
            } catch (...) {
                errors[rep] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::min(cfg.threads, cfg.repetitions);
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return runs;
}

std::vector<MetricsRow> mean_rows(const std::vector<RunResult>& runs) {
    if (runs.empty()) return {};
    std::vector<MetricsRow> mean = runs.front().rows;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].rows.size() != mean.size()) throw std::invalid_argument("runs have different row layouts");
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const MetricsRow& row = runs[r].rows[i];
            if (row.episode != mean[i].episode || row.agent != mean[i].agent)
                throw std::invalid_argument("runs have different row layouts");
            mean[i].regret += row.regret;
            mean[i].reward_sse += row.reward_sse;
            mean[i].transition_mse += row.transition_mse;
            mean[i].unique_visited += row.unique_visited;
        }
    }
    const double n = static_cast<double>(runs.size());
    for (auto& row : mean) {
        row.regret /= n;
        row.reward_sse /= n;
        row.transition_mse /= n;
        row.unique_visited /= n;
    }
    return mean;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << "episode,agent,regret,reward_sse,transition_mse,unique_visited\n";
    for (const auto& r : rows)
        out << r.episode << ',' << r.agent << ',' << format_double(r.regret) << ',' << format_double(r.reward_sse) << ','
            << format_double(r.transition_mse) << ',' << format_double(r.unique_visited) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "episode,agent,regret,reward_sse,transition_mse,unique_visited")
        throw FormatError("metrics CSV: unexpected header");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::istringstream is(line);
        for (std::string cell; std::getline(is, cell, ',');) f.push_back(trim(cell));
        if (f.size() != 6) throw FormatError("metrics CSV: expected 6 fields in '" + line + "'");
        MetricsRow r;
        r.episode = parse_size("episode", f[0]);
        r.agent = f[1];
        r.regret = parse_double(f[2]);
        r.reward_sse = parse_double(f[3]);
        r.transition_mse = parse_double(f[4]);
        r.unique_visited = parse_double(f[5]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_results(const fs::path& dir, const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
    fs::create_directories(dir);
    for (const auto& run : runs) {
        std::ofstream out(dir / ("metrics_run" + std::to_string(run.repetition) + ".csv"));
        if (!out) throw IoError("cannot write metrics to " + dir.string());
        write_metrics_csv(out, run.rows);
    }
    {
        std::ofstream out(dir / "metrics_mean.csv");
        if (!out) throw IoError("cannot write metrics to " + dir.string());
        write_metrics_csv(out, mean_rows(runs));
    }
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw IoError("cannot write manifest to " + dir.string());
    out << format_config(cfg);
    for (const auto& run : runs)
        out << "# run " << run.repetition << ": seed = " << run.seed
            << ", optimal_return = " << format_double(run.optimal_return) << '\n';
}

} // namespace tensorrl
