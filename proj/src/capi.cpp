#include "tensorrl/tensorrl.h"

#include "tensorrl/completion.hpp"
#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/harness.hpp"
#include "tensorrl/mdp_gen.hpp"
#include "tensorrl/mdp_io.hpp"
#include "tensorrl/tensor_io.hpp"

#include <filesystem>
#include <new>
#include <string>

struct trl_tensor {
    tensorrl::DenseTensor value;
};

struct trl_cp {
    tensorrl::CPForm value;
};

struct trl_mdp {
    tensorrl::TabularMDP value;
    tensorrl::MdpMetadata meta;
};

struct trl_experiment_config {
    tensorrl::ExperimentConfig value;
};

namespace {

thread_local std::string last_error;

template <class F>
trl_status guarded(F&& f) {
    try {
        last_error.clear();
        f();
        return TRL_OK;
    } catch (const tensorrl::ShapeError& e) {
        last_error = e.what();
        return TRL_ERR_SHAPE;
    } catch (const tensorrl::FormatError& e) {
        last_error = e.what();
        return TRL_ERR_FORMAT;
    } catch (const tensorrl::DegenerateTensorError& e) {
        last_error = e.what();
        return TRL_ERR_DEGENERATE;
    } catch (const tensorrl::NotConvergedError& e) {
        last_error = e.what();
        return TRL_ERR_NOT_CONVERGED;
    } catch (const tensorrl::IoError& e) {
        last_error = e.what();
        return TRL_ERR_IO;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return TRL_ERR_IO;
    } catch (const std::invalid_argument& e) {
        last_error = e.what();
        return TRL_ERR_INVALID_ARGUMENT;
    } catch (const std::out_of_range& e) {
        last_error = e.what();
        return TRL_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return TRL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return TRL_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return TRL_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw std::invalid_argument(std::string(what) + " must not be null");
}

tensorrl::DecompConfig to_config(const trl_decomp_config* c) {
    tensorrl::DecompConfig d;
    d.rank = c->rank;
    d.power_tolerance = c->power_tolerance;
    d.power_max_iters = c->power_max_iters;
    d.altmin_max_sweeps = c->altmin_max_sweeps;
    d.altmin_tolerance = c->altmin_tolerance;
    d.seed = c->seed;
    d.max_restarts = c->max_restarts;
    d.validate();
    return d;
}

} // namespace

extern "C" {

const char* trl_version(void) { return "0.1.0"; }

const char* trl_last_error(void) { return last_error.c_str(); }

const char* trl_status_name(trl_status status) {
    switch (status) {
    case TRL_OK:
        return "ok";
    case TRL_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case TRL_ERR_SHAPE:
        return "shape error";
    case TRL_ERR_IO:
        return "i/o error";
    case TRL_ERR_FORMAT:
        return "format error";
    case TRL_ERR_DEGENERATE:
        return "degenerate tensor";
    case TRL_ERR_NOT_CONVERGED:
        return "not converged";
    case TRL_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

trl_status trl_tensor_create(const size_t* shape, size_t order, const double* data, trl_tensor** out) {
    return guarded([&] {
        require(out, "out");
        if (order > 0) require(shape, "shape");
        tensorrl::Shape s(shape, shape + order);
        tensorrl::DenseTensor t(s);
        if (data) std::copy_n(data, t.size(), t.data());
        if (!t.all_finite()) throw std::invalid_argument("tensor data must be finite");
        *out = new trl_tensor{std::move(t)};
    });
}

trl_status trl_tensor_load(const char* path, trl_tensor** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new trl_tensor{tensorrl::load_tensor(path)};
    });
}

trl_status trl_tensor_save(const trl_tensor* t, const char* path) {
    return guarded([&] {
        require(t, "tensor");
        require(path, "path");
        tensorrl::save_tensor(path, t->value);
    });
}

size_t trl_tensor_order(const trl_tensor* t) { return t ? t->value.order() : 0; }
size_t trl_tensor_size(const trl_tensor* t) { return t ? t->value.size() : 0; }

void trl_tensor_shape(const trl_tensor* t, size_t* shape) {
    if (!t || !shape) return;
    std::copy(t->value.shape().begin(), t->value.shape().end(), shape);
}

const double* trl_tensor_data(const trl_tensor* t) { return t ? t->value.data() : nullptr; }
void trl_tensor_free(trl_tensor* t) { delete t; }

void trl_decomp_config_default(trl_decomp_config* cfg) {
    if (!cfg) return;
    const tensorrl::DecompConfig d;
    cfg->rank = d.rank;
    cfg->power_tolerance = d.power_tolerance;
    cfg->power_max_iters = d.power_max_iters;
    cfg->altmin_max_sweeps = d.altmin_max_sweeps;
    cfg->altmin_tolerance = d.altmin_tolerance;
    cfg->seed = d.seed;
    cfg->max_restarts = d.max_restarts;
}

trl_status trl_decompose(const trl_tensor* t, const trl_decomp_config* cfg, trl_cp** out) {
    return guarded([&] {
        require(t, "tensor");
        require(cfg, "config");
        require(out, "out");
        *out = new trl_cp{tensorrl::decompose(t->value, to_config(cfg))};
    });
}

trl_status trl_complete(const trl_tensor* observed, const trl_tensor* mask, const trl_decomp_config* cfg,
                        trl_cp** out) {
    return guarded([&] {
        require(observed, "observed");
        require(mask, "mask");
        require(cfg, "config");
        require(out, "out");
        const tensorrl::ObservationMask m(mask->value);
        *out = new trl_cp{tensorrl::complete(observed->value, m, to_config(cfg))};
    });
}

trl_status trl_cp_load(const char* path, trl_cp** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new trl_cp{tensorrl::load_cp(path)};
    });
}

trl_status trl_cp_save(const trl_cp* cp, const char* path) {
    return guarded([&] {
        require(cp, "cp");
        require(path, "path");
        tensorrl::save_cp(path, cp->value);
    });
}

size_t trl_cp_rank(const trl_cp* cp) { return cp ? cp->value.rank() : 0; }
size_t trl_cp_order(const trl_cp* cp) { return cp ? cp->value.order() : 0; }

void trl_cp_weights(const trl_cp* cp, double* weights) {
    if (!cp || !weights) return;
    std::copy(cp->value.weights().begin(), cp->value.weights().end(), weights);
}

trl_status trl_cp_reconstruct(const trl_cp* cp, trl_tensor** out) {
    return guarded([&] {
        require(cp, "cp");
        require(out, "out");
        *out = new trl_tensor{tensorrl::reconstruct(cp->value)};
    });
}

void trl_cp_free(trl_cp* cp) { delete cp; }

trl_status trl_mdp_generate(const char* experiment, uint64_t seed, double discount, trl_mdp** out) {
    return guarded([&] {
        require(experiment, "experiment");
        require(out, "out");
        const auto id = tensorrl::parse_experiment(experiment);
        *out = new trl_mdp{tensorrl::build_experiment_mdp(id, seed, discount), {tensorrl::to_string(id), seed}};
    });
}

trl_status trl_mdp_load(const char* dir, trl_mdp** out) {
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        auto loaded = tensorrl::load_mdp(dir);
        *out = new trl_mdp{std::move(loaded.mdp), std::move(loaded.metadata)};
    });
}

trl_status trl_mdp_save(const trl_mdp* mdp, const char* dir) {
    return guarded([&] {
        require(mdp, "mdp");
        require(dir, "dir");
        tensorrl::save_mdp(dir, mdp->value, mdp->meta);
    });
}

size_t trl_mdp_states(const trl_mdp* mdp) { return mdp ? mdp->value.n_states() : 0; }
size_t trl_mdp_joint_actions(const trl_mdp* mdp) { return mdp ? mdp->value.joint_action_count() : 0; }
void trl_mdp_free(trl_mdp* mdp) { delete mdp; }

trl_status trl_experiment_config_create(const char* experiment, trl_experiment_config** out) {
    return guarded([&] {
        require(experiment, "experiment");
        require(out, "out");
        *out = new trl_experiment_config{tensorrl::default_config(tensorrl::parse_experiment(experiment))};
    });
}

trl_status trl_experiment_config_load(trl_experiment_config* cfg, const char* path) {
    return guarded([&] {
        require(cfg, "config");
        require(path, "path");
        cfg->value = tensorrl::load_config(path, cfg->value);
    });
}

trl_status trl_experiment_config_set(trl_experiment_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        require(cfg, "config");
        require(key, "key");
        require(value, "value");
        tensorrl::apply_config_value(cfg->value, key, value);
    });
}

void trl_experiment_config_free(trl_experiment_config* cfg) { delete cfg; }

trl_status trl_experiment_run(const trl_experiment_config* cfg, const char* out_dir, const char* dump_dir) {
    return guarded([&] {
        require(cfg, "config");
        require(out_dir, "out_dir");
        std::optional<std::filesystem::path> dump;
        if (dump_dir) dump = dump_dir;
        const auto runs = tensorrl::run_experiment(cfg->value, dump);
        tensorrl::write_results(out_dir, cfg->value, runs);
    });
}

} // extern "C"
