// Command-line front end over the C API.
#include "tensorrl/tensorrl.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Failure {
    trl_status status;
    std::string context;
};

void check(trl_status s, const std::string& context) {
    if (s != TRL_OK) throw Failure{s, context};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Tensor = std::unique_ptr<trl_tensor, Deleter<trl_tensor, trl_tensor_free>>;
using Cp = std::unique_ptr<trl_cp, Deleter<trl_cp, trl_cp_free>>;
using Mdp = std::unique_ptr<trl_mdp, Deleter<trl_mdp, trl_mdp_free>>;
using Config = std::unique_ptr<trl_experiment_config, Deleter<trl_experiment_config, trl_experiment_config_free>>;

Tensor load_tensor(const std::string& path) {
    trl_tensor* t = nullptr;
    check(trl_tensor_load(path.c_str(), &t), "reading " + path);
    return Tensor(t);
}

trl_decomp_config decomp_config(std::size_t rank, std::uint64_t seed) {
    trl_decomp_config c;
    trl_decomp_config_default(&c);
    c.rank = rank;
    c.seed = seed;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CP tensor decomposition and low-rank model-based multi-agent RL"};
    app.require_subcommand(1);
    app.set_version_flag("--version", trl_version());

    std::size_t rank = 1;
    std::uint64_t seed = 0;
    std::string in, out, mask;

    auto* decompose = app.add_subcommand("decompose", "CP-decompose a tensor file");
    decompose->add_option("--rank", rank, "CP rank")->required()->check(CLI::PositiveNumber);
    decompose->add_option("--seed", seed, "random seed");
    decompose->add_option("--in", in, "input tensor file")->required();
    decompose->add_option("--out", out, "output CP file")->required();

    auto* complete = app.add_subcommand("complete", "complete a partially observed tensor");
    complete->add_option("--rank", rank, "CP rank")->required()->check(CLI::PositiveNumber);
    complete->add_option("--seed", seed, "random seed");
    complete->add_option("--in", in, "observed tensor file")->required();
    complete->add_option("--mask", mask, "0/1 mask tensor file")->required();
    complete->add_option("--out", out, "output CP file")->required();

    std::string experiment;
    double discount = 0.9;
    auto* gen = app.add_subcommand("gen-mdp", "generate an experiment MDP");
    gen->add_option("--experiment", experiment, "rank5 or degenerate")
        ->required()
        ->check(CLI::IsMember({"rank5", "degenerate"}));
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--discount", discount, "discount factor");
    gen->add_option("--out", out, "output directory")->required();

    std::string config_path, dump_dir;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "run an experiment and write metrics CSVs");
    run->add_option("--experiment", experiment, "rank5 or degenerate")
        ->required()
        ->check(CLI::IsMember({"rank5", "degenerate"}));
    run->add_option("--config", config_path, "key = value config file");
    run->add_option("--out", out, "results directory")->required();
    run->add_option("--reps", reps, "repetitions");
    run->add_option("--seed", run_seed, "base seed");
    run->add_option("--dump-models", dump_dir, "directory for final model estimates");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*decompose) {
            Tensor t = load_tensor(in);
            const trl_decomp_config c = decomp_config(rank, seed);
            trl_cp* cp = nullptr;
            check(trl_decompose(t.get(), &c, &cp), "decomposing " + in);
            Cp owned(cp);
            check(trl_cp_save(cp, out.c_str()), "writing " + out);
        } else if (*complete) {
            Tensor t = load_tensor(in);
            Tensor m = load_tensor(mask);
            const trl_decomp_config c = decomp_config(rank, seed);
            trl_cp* cp = nullptr;
            check(trl_complete(t.get(), m.get(), &c, &cp), "completing " + in);
            Cp owned(cp);
            check(trl_cp_save(cp, out.c_str()), "writing " + out);
        } else if (*gen) {
            trl_mdp* mdp = nullptr;
            check(trl_mdp_generate(experiment.c_str(), seed, discount, &mdp), "generating " + experiment);
            Mdp owned(mdp);
            check(trl_mdp_save(mdp, out.c_str()), "writing " + out);
        } else if (*run) {
            trl_experiment_config* cfg = nullptr;
            check(trl_experiment_config_create(experiment.c_str(), &cfg), "configuring " + experiment);
            Config owned(cfg);
            if (!config_path.empty()) check(trl_experiment_config_load(cfg, config_path.c_str()), "reading " + config_path);
            check(trl_experiment_config_set(cfg, "experiment", experiment.c_str()), "configuring");
            if (reps) check(trl_experiment_config_set(cfg, "repetitions", std::to_string(*reps).c_str()), "--reps");
            if (run_seed) check(trl_experiment_config_set(cfg, "base_seed", std::to_string(*run_seed).c_str()), "--seed");
            check(trl_experiment_run(cfg, out.c_str(), dump_dir.empty() ? nullptr : dump_dir.c_str()), "running");
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s: %s: %s\n", f.context.c_str(), trl_status_name(f.status), trl_last_error());
        return 1;
    }
    return 0;
}
