#include <cmath>
#include <cstdio>
#include <sstream>

#include "spectral/cli.hpp"
#include "spectral/errors.hpp"
#include "spectral/mollify.hpp"
#include "spectral/parallel.hpp"
#include "spectral/trace.hpp"

namespace spectral::cli {

namespace {

// exact decimal form of a double, so fingerprints never depend on formatting defaults
std::string exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json afe_json(const lvalues::AfeConfig& a) {
    Json j;
    j["delta"] = exact(a.delta);
    j["kernel"] = a.kernel == lvalues::Kernel::gaussian ? "gaussian" : "quartic";
    j["kernel_b"] = exact(a.kernel_b);
    j["tail_cut"] = exact(a.tail_cut);
    j["quad_step"] = exact(a.quad.step);
    j["quad_radius"] = exact(a.quad.radius);
    j["quad_tol"] = exact(a.quad.target_abs_tol);
    j["quad_refinements"] = a.quad.max_refinements;
    return j;
}

Json spec_json(const moments::WeightSpec& w) {
    Json j;
    j["T"] = w.T;
    j["H"] = w.H;
    j["G"] = w.G;
    return j;
}

struct Context {
    const RunConfig& cfg;
    ResultsStore store;
    spectra::SpectralDataset ds;
    std::string digest;
    PipelineResult result;
    std::optional<moments::SpectralValues> values;

    explicit Context(const RunConfig& c) : cfg(c), store(c.cache_dir) {}

    Record make(const std::string& op, Json params) const {
        Record r;
        r.operation = op;
        r.params = std::move(params);
        r.params["dataset"] = digest;
        r.fingerprint = fingerprint(op, r.params);
        r.inputs_digest = digest;
        return r;
    }

    std::optional<Record> cached(const Record& key) {
        auto hit = store.find(key.operation, key.fingerprint);
        if (hit) ++result.cache_hits;
        return hit;
    }

    Record commit(Record r) {
        store.put(r);
        ++result.computed;
        // the stored copy carries the timestamp and digest
        return *store.find(r.operation, r.fingerprint);
    }
};

void load_dataset(Context& ctx) {
    fs::path path = ctx.cfg.dataset_path;
    if (ctx.cfg.dataset_url) {
        const auto f = fetch_dataset(*ctx.cfg.dataset_url, *ctx.cfg.dataset_sha256, ctx.cfg.cache_dir);
        path = f.path;
        ctx.result.notes.push_back(std::string("dataset ") + (f.cache_hit ? "from cache " : "fetched to ") +
                                   path.string());
    } else if (ctx.cfg.dataset_sha256 && sha256_file(path) != *ctx.cfg.dataset_sha256) {
        throw ValidationError("dataset " + path.string() + " does not match dataset_sha256");
    }
    ctx.digest = sha256_file(path);
    ctx.ds = spectra::load_dataset(path);
}

// Central values and harmonic weights, one record per even form; every command
// that needs them goes through here so they are computed once per (dataset, afe).
const moments::SpectralValues& central_values(Context& ctx) {
    if (ctx.values) return *ctx.values;
    std::vector<const spectra::MaassForm*> even;
    for (const auto* f : ctx.ds.even_forms())
        if (ctx.ds.window.contains(f->kappa)) even.push_back(f);
    std::vector<Record> recs(even.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < even.size(); ++i) {
        Json p;
        p["kappa"] = exact(even[i]->kappa);
        p["afe"] = afe_json(ctx.cfg.afe);
        recs[i] = ctx.make("lvalues", p);
        if (auto hit = ctx.cached(recs[i])) {
            recs[i] = *hit;
        } else {
            missing.push_back(i);
        }
    }
    parallel_for(missing.size(), ctx.cfg.threads, [&](std::size_t k) {
        auto& rec = recs[missing[k]];
        const auto& f = *even[missing[k]];
        const auto cv = lvalues::central_value(f, ctx.cfg.afe);
        const auto w = spectra::harmonic_weight(f);
        Json o;
        o["kappa"] = f.kappa;
        o["value"] = cv.value;
        o["err_estimate"] = cv.err_estimate;
        o["terms_used"] = cv.terms_used;
        o["alpha"] = w.alpha;
        o["alpha_err"] = w.alpha * w.l_sym2_err / w.l_sym2;
        o["nonzero"] = lvalues::ThresholdPolicy{}.nonzero(cv);
        rec.outputs = o;
        rec.tolerances["tail_cut"] = ctx.cfg.afe.tail_cut;
        rec.tolerances["quad_tol"] = ctx.cfg.afe.quad.target_abs_tol;
        rec.tolerances["nonzero_policy"] = "value > 10 x err_estimate";
    });
    for (auto i : missing) recs[i] = ctx.commit(recs[i]);

    moments::SpectralValues v;
    v.window = ctx.ds.window;
    v.depth = ctx.ds.depth;
    for (std::size_t i = 0; i < even.size(); ++i) {
        const auto& o = recs[i].outputs;
        moments::FormValue fv;
        fv.form = even[i];
        fv.kappa = even[i]->kappa;
        fv.alpha = o.at("alpha").get<double>();
        fv.alpha_err = o.at("alpha_err").get<double>();
        fv.central.value = o.at("value").get<double>();
        fv.central.err_estimate = o.at("err_estimate").get<double>();
        fv.central.terms_used = o.at("terms_used").get<int>();
        v.even.push_back(fv);
    }
    ctx.values = std::move(v);
    if (ctx.result.command == Command::lvalues) ctx.result.records = std::move(recs);
    return *ctx.values;
}

// Looks every key up first; `compute` runs only for the misses, in key order.
template <class F>
void cached_batch(Context& ctx, std::vector<Record> keys, F&& compute) {
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (auto hit = ctx.cached(keys[i])) {
            keys[i] = *hit;
        } else {
            missing.push_back(i);
        }
    }
    for (auto i : missing) {
        compute(keys[i]);
        keys[i] = ctx.commit(keys[i]);
    }
    ctx.result.records = std::move(keys);
}

void run_validate(Context& ctx) {
    Record key = ctx.make("validate", Json::object());
    cached_batch(ctx, {key}, [&](Record& r) {
        const auto& ds = ctx.ds;
        int even = 0;
        double worst = 0.0;
        for (const auto& f : ds.forms) {
            even += f.even();
            worst = std::max(worst, spectra::hecke_residual(f));
        }
        const auto weyl = spectra::weyl_count(ds, ds.window.kappa_max);
        Json o;
        o["forms"] = static_cast<int>(ds.forms.size());
        o["even"] = even;
        o["odd"] = static_cast<int>(ds.forms.size()) - even;
        o["depth"] = ds.depth;
        o["window_min"] = ds.window.kappa_min;
        o["window_max"] = ds.window.kappa_max;
        o["max_hecke_residual"] = worst;
        o["weyl_count"] = weyl.count;
        o["weyl_prediction"] = weyl.prediction;
        o["provenance"] = ds.provenance;
        r.outputs = o;
        r.tolerances["hecke"] = spectra::kHeckeToleranceData;
    });
}

void run_lvalues(Context& ctx) { central_values(ctx); }

void run_trace(Context& ctx) {
    const trace::TestFunction g{ctx.cfg.K, ctx.cfg.G};
    std::vector<Record> keys;
    for (const auto& [m, n] : ctx.cfg.trace_pairs) {
        Json p;
        p["m"] = m;
        p["n"] = n;
        p["K"] = g.K;
        p["G"] = g.G;
        keys.push_back(ctx.make("trace", p));
    }
    // compute the misses as one parallel grid, then commit in order
    std::vector<std::pair<std::int64_t, std::int64_t>> todo;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (auto hit = ctx.cached(keys[i])) {
            keys[i] = *hit;
        } else {
            todo.push_back(ctx.cfg.trace_pairs[i]);
            idx.push_back(i);
        }
    }
    const auto reports = trace::verify_grid(ctx.ds, todo, g, 0, ctx.cfg.threads);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& t = reports[k];
        auto& r = keys[idx[k]];
        Json o;
        o["spectral"] = t.spectral;
        o["eisenstein"] = t.eisenstein;
        o["diagonal"] = t.diagonal;
        o["kloosterman"] = t.kloosterman;
        o["residual"] = t.residual;
        o["relative_residual"] = t.relative_residual();
        o["Q"] = t.params.Q;
        o["outside_mass"] = t.outside_mass;
        o["q_tail"] = t.q_tail;
        r.outputs = o;
        r.tolerances["outside_mass_limit"] = trace::kOutsideMassLimit;
        r.tolerances["q_tail_limit"] = trace::kQTailLimit;
        r = ctx.commit(r);
    }
    ctx.result.records = std::move(keys);
}

void run_moments(Context& ctx) {
    std::vector<Record> keys;
    for (long l : ctx.cfg.l_list) {
        for (int order : {1, 2}) {
            Json p;
            p["l"] = l;
            p["order"] = order;
            p["window"] = spec_json(ctx.cfg.window);
            p["afe"] = afe_json(ctx.cfg.afe);
            keys.push_back(ctx.make("moments", p));
        }
    }
    cached_batch(ctx, keys, [&](Record& r) {
        const auto rep = moments::moment_report(central_values(ctx), r.params["l"].get<long>(), ctx.cfg.window,
                                                r.params["order"].get<int>());
        Json o;
        o["spectral"] = rep.spectral;
        o["main_term"] = rep.main_term;
        o["residual"] = rep.residual;
        o["rel_residual"] = rep.rel_residual;
        o["ratio"] = rep.ratio;
        o["within_band"] = rep.within_band;
        o["error_shape"] = rep.error_shape;
        o["rational_main"] = rep.rational_main;
        o["rational_ratio"] = rep.rational_ratio;
        o["window_min"] = rep.window.kappa_min;
        o["window_max"] = rep.window.kappa_max;
        r.outputs = o;
        r.tolerances["band_lo"] = rep.band_lo;
        r.tolerances["band_hi"] = rep.band_hi;
        r.tolerances["note"] = rep.tolerance_note;
    });
}

void run_explicit(Context& ctx) {
    const trace::TestFunction g{ctx.cfg.K, ctx.cfg.G};
    const moments::ExplicitOptions opt_defaults;
    std::vector<Record> keys;
    for (long l : ctx.cfg.l_list) {
        Json p;
        p["l"] = l;
        p["K"] = g.K;
        p["G"] = g.G;
        p["c"] = opt_defaults.c;
        p["tail_target"] = opt_defaults.tail_target;
        p["afe"] = afe_json(ctx.cfg.afe);
        keys.push_back(ctx.make("explicit", p));
    }
    cached_batch(ctx, keys, [&](Record& r) {
        auto opt = opt_defaults;
        opt.threads = ctx.cfg.threads;
        const auto e = moments::explicit_terms(central_values(ctx), r.params["l"].get<long>(), g, opt);
        Json o;
        for (int i = 0; i < 7; ++i) o["R" + std::to_string(i + 1)] = e.r[static_cast<std::size_t>(i)];
        o["lhs"] = e.lhs;
        o["lhs_err"] = e.lhs_err;
        o["sum"] = e.sum();
        o["residual"] = e.residual;
        o["rel_residual"] = e.rel_residual();
        o["r1_closed"] = e.r1_closed;
        o["r1_closed_rational"] = e.r1_closed_rational;
        const auto& t = e.truncations;
        o["r2_terms"] = t.r2_terms;
        o["r3_terms"] = t.r3_terms;
        o["psi_radius"] = t.psi_radius;
        o["r7_radius"] = t.r7_radius;
        r.outputs = o;
        r.tolerances["r2_tail"] = t.r2_tail;
        r.tolerances["r3_tail"] = t.r3_tail;
        r.tolerances["psi_delta"] = t.psi_delta;
        r.tolerances["hhat_delta"] = t.hhat_delta;
        r.tolerances["r7_delta"] = t.r7_delta;
        r.tolerances["max_certificate"] = t.max_certificate();
    });
}

Json proportion_json(const mollify::ProportionReport& rep) {
    Json o;
    o["M"] = rep.M;
    o["m1"] = rep.m1;
    o["m2"] = rep.m2;
    o["bound"] = rep.bound;
    o["delta_used"] = rep.delta_used;
    o["theoretical"] = rep.theoretical;
    o["predicted1"] = rep.predicted1;
    o["predicted2"] = rep.predicted2;
    o["ratio1"] = rep.ratio1;
    o["ratio2"] = rep.ratio2;
    o["m1_harmonic"] = rep.m1_harmonic;
    o["m2_harmonic"] = rep.m2_harmonic;
    o["bound_harmonic"] = rep.bound_harmonic;
    if (rep.empirical) {
        o["empirical_T"] = rep.empirical->T;
        o["empirical_nonzero"] = rep.empirical->nonzero;
        o["empirical_total"] = rep.empirical->total;
        if (rep.empirical->proportion) {
            o["empirical"] = *rep.empirical->proportion;
        } else {
            o["empirical"] = nullptr;
        }
        o["empirical_policy"] = rep.empirical->policy_note;
    }
    return o;
}

void run_mollify(Context& ctx, bool with_empirical) {
    const std::string op = with_empirical ? "nonvanishing" : "mollify";
    std::vector<Record> keys;
    for (double d : ctx.cfg.delta_list) {
        Json p;
        p["delta"] = d;
        p["window"] = spec_json(ctx.cfg.window);
        p["shape"] = "P(u)=u";
        p["afe"] = afe_json(ctx.cfg.afe);
        if (with_empirical) p["empirical_T"] = ctx.cfg.empirical_T;
        keys.push_back(ctx.make(op, p));
    }
    cached_batch(ctx, keys, [&](Record& r) {
        const auto& v = central_values(ctx);
        const auto mol = mollify::build(ctx.cfg.window.T, r.params["delta"].get<double>());
        std::optional<mollify::EmpiricalCount> emp;
        if (with_empirical) emp = mollify::empirical_count(v, ctx.cfg.empirical_T);
        auto o = proportion_json(mollify::proportion_report(v, mol, ctx.cfg.window, emp));
        if (with_empirical) {
            const double beta = std::log(ctx.cfg.window.H) / std::log(ctx.cfg.window.T);
            const auto a = mollify::admissible_delta(std::min(1.0, beta));
            o["beta"] = beta;
            o["admissible_alpha"] = a.alpha;
            o["admissible_delta"] = a.delta;
            o["admissible_proportion"] = a.proportion;
            o["admissible_on_boundary"] = a.on_boundary;
        }
        r.outputs = o;
        r.tolerances["band"] = "ratio to predicted moments within a factor 2 is reported, not enforced";
    });
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "validate") return Command::validate;
    if (name == "lvalues") return Command::lvalues;
    if (name == "trace") return Command::trace;
    if (name == "moments") return Command::moments;
    if (name == "explicit") return Command::explicit_formula;
    if (name == "mollify") return Command::mollify;
    if (name == "nonvanishing") return Command::nonvanishing;
    throw ValidationError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::validate: return "validate";
        case Command::lvalues: return "lvalues";
        case Command::trace: return "trace";
        case Command::moments: return "moments";
        case Command::explicit_formula: return "explicit";
        case Command::mollify: return "mollify";
        case Command::nonvanishing: return "nonvanishing";
    }
    return "?";
}

PipelineResult run_pipeline(const RunConfig& cfg, Command command) {
    cfg.validate();
    Context ctx(cfg);
    ctx.result.command = command;
    load_dataset(ctx);
    switch (command) {
        case Command::validate: run_validate(ctx); break;
        case Command::lvalues: run_lvalues(ctx); break;
        case Command::trace: run_trace(ctx); break;
        case Command::moments: run_moments(ctx); break;
        case Command::explicit_formula: run_explicit(ctx); break;
        case Command::mollify: run_mollify(ctx, false); break;
        case Command::nonvanishing: run_mollify(ctx, true); break;
    }
    return std::move(ctx.result);
}

}  // namespace spectral::cli
