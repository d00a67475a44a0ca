// Command-line front end. Everything goes through the C API (mfld_run);
// this file only turns flags into JSON requests and writes the results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <openssl/sha.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfld/mfld.h"

using Json = nlohmann::json;

namespace {

// usage problems exit with 2, computation problems with 1
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json load_json(const std::string& path) {
    try {
        return Json::parse(slurp(path));
    } catch (const Json::exception& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

std::string sha256_hex(const std::string& s) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(s.data()), s.size(), md);
    std::ostringstream os;
    for (unsigned char c : md) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
    return os.str();
}

Json call(const std::string& command, const Json& request) {
    char* raw = nullptr;
    const mfld_status st = mfld_run(command.c_str(), request.dump().c_str(), &raw);
    if (st != MFLD_OK) {
        const std::string msg = std::string(mfld_last_error());
        if (st == MFLD_E_INVALID_ARGUMENT || st == MFLD_E_IO) throw UsageError(msg);
        throw ComputeError(msg);
    }
    Json out = Json::parse(raw);
    mfld_string_free(raw);
    return out;
}

// "start:step:stop", stop included
std::vector<double> parse_grid(const std::string& spec) {
    double a, h, b;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> a >> c1 >> h >> c2 >> b) || c1 != ':' || c2 != ':' || !(h > 0) || b < a)
        throw UsageError("--t-grid expects start:step:stop with step > 0, got '" + spec + "'");
    const long k = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (k > 100000) throw UsageError("--t-grid has too many points");
    std::vector<double> g;
    for (long i = 0; i <= k; ++i) g.push_back(a + static_cast<double>(i) * h);
    return g;
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string num_field(const Json& j) { return j.is_null() ? std::string("inf") : fmt(j.get<double>()); }

std::string phi_csv(const Json& res) {
    std::string s = "t,phi,feasible,lambda,converged,upper_bound_only\n";
    for (const auto& r : res.at("rows")) {
        const auto& d = r.at("diagnostics");
        s += fmt(r.at("t").get<double>()) + "," + num_field(r.at("phi")) + "," + (r.at("feasible").get<bool>() ? "1" : "0") + "," +
             fmt(r.at("lambda").get<double>()) + "," + (d.at("converged").get<bool>() ? "1" : "0") + "," +
             (d.at("upper_bound_only").get<bool>() ? "1" : "0") + "\n";
    }
    return s;
}

// Primary output text for a finished command.
std::string render(const std::string& format, const Json& res) {
    if (format == "phi_csv") return phi_csv(res);
    return res.dump(2) + "\n";
}

struct Job {
    std::string command;
    Json request = Json::object();
    std::string format = "json";
    // side outputs: response field -> file path
    std::vector<std::pair<std::string, std::string>> extracts;
};

int execute(const Job& job, const std::optional<std::string>& out_path, std::optional<std::string> manifest_path,
            const std::vector<std::string>& argv, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    Json res = call(job.command, job.request);
    Json side = Json::object();
    for (const auto& [field, path] : job.extracts) {
        if (res.contains(field)) {
            const std::string text = res.at(field).get<std::string>();
            spit(path, text);
            side[path] = sha256_hex(text);
            res.erase(field);
        }
    }
    const std::string text = render(job.format, res);
    if (out_path) spit(*out_path, text);
    else std::cout << text << std::flush;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Json manifest = {{"subcommand", job.command},
                     {"parameters", job.request},
                     {"format", job.format},
                     {"seed", job.request.contains("seed") ? job.request.at("seed") : Json(nullptr)},
                     {"version", mfld_version()},
                     {"threads", threads},
                     {"argv", argv},
                     {"wall_time_s", wall},
                     {"output_sha256", sha256_hex(text)},
                     {"side_outputs", side}};
    if (!manifest_path && out_path) manifest_path = *out_path + ".manifest.json";
    if (manifest_path) spit(*manifest_path, manifest.dump(2) + "\n");
    else std::cerr << manifest.dump() << "\n";

    if (job.command == "verify" && !res.value("passed", false)) return 1;
    return 0;
}

int replay(const std::string& path, const std::optional<std::string>& out_path) {
    const Json m = load_json(path);
    if (!m.contains("subcommand") || !m.contains("parameters") || !m.contains("output_sha256"))
        throw UsageError("'" + path + "' is not a run manifest");
    const Json res = call(m.at("subcommand").get<std::string>(), m.at("parameters"));
    Json stripped = res;
    for (const char* f : {"plan_csv", "trace_csv"}) stripped.erase(f);
    const std::string text = render(m.value("format", std::string("json")), stripped);
    if (out_path) spit(*out_path, text);
    else std::cout << text << std::flush;
    const bool same = sha256_hex(text) == m.at("output_sha256").get<std::string>();
    std::cerr << (same ? "replay: output digest matches\n" : "replay: output digest differs\n");
    return same ? 0 : 1;
}

// --model/--file/--N shared by complexity, meanfield and ld tail
struct ModelFlags {
    std::string model = "table";
    std::string file;
    int N = 0;

    void add(CLI::App* app) {
        app->add_option("--model", model, "table | ising | subgraph | triangle")
            ->check(CLI::IsMember({"table", "ising", "subgraph", "triangle"}));
        app->add_option("--file", file, "JSON input (function/log-density table, Ising {A,b}, or subgraph model)");
        app->add_option("--N", N, "vertex count for --model triangle");
    }
    void fill(Json& r) const {
        r["model"] = model;
        if (model == "triangle") {
            if (N < 3) throw UsageError("--model triangle needs --N >= 3");
            r["N"] = N;
        } else {
            if (file.empty()) throw UsageError("--model " + model + " needs --file");
            r["data"] = load_json(file);
        }
    }
};

int env_threads() {
    const char* e = std::getenv("MFLD_THREADS");
    if (!e || !*e) return 0;
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (*end || v < 0) throw UsageError("MFLD_THREADS must be a nonnegative integer");
    return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field / gradient-complexity toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    std::optional<std::string> out_path, manifest_path;
    int threads = -1;
    app.add_option("--out", out_path, "write the primary output here instead of stdout");
    app.add_option("--manifest", manifest_path, "run manifest path (default: <out>.manifest.json, else stderr)");
    app.add_option("--threads", threads, "worker threads (default: MFLD_THREADS, else all cores)")->check(CLI::NonNegativeNumber);

    Job job;
    std::uint64_t seed = 0;
    auto seed_opt = [&](CLI::App* sub) { sub->add_option("--seed", seed, "random seed")->required(); };

    // complexity
    ModelFlags cx_model;
    std::int64_t samples = 10000, subsample = 0;
    auto* cx = app.add_subcommand("complexity", "Monte-Carlo gradient complexity (Gaussian width of the gradient set)");
    cx_model.add(cx);
    cx->add_option("--samples", samples)->check(CLI::Range(std::int64_t{2}, std::int64_t{100000000}));
    cx->add_option("--subsample", subsample, "sup over this many random vertices per draw (lower estimate)");
    seed_opt(cx);

    // meanfield
    auto* mf = app.add_subcommand("meanfield", "naive mean-field problem");
    mf->require_subcommand(1);
    ModelFlags mf_model;
    double p = 0.5, t = 0.0;
    int restarts = 16, max_iter = 2000;
    std::string t_grid;
    auto* mf_solve = mf->add_subcommand("solve", "maximize E_m f - KL(m || mu_p) over products");
    auto* mf_phi = mf->add_subcommand("phi", "rate function phi_p(t)");
    for (auto* s : {mf_solve, mf_phi}) {
        mf_model.add(s);
        s->add_option("--p", p)->check(CLI::Range(0.0, 1.0));
        s->add_option("--restarts", restarts)->check(CLI::NonNegativeNumber);
        s->add_option("--max-iterations", max_iter)->check(CLI::PositiveNumber);
        seed_opt(s);
    }
    auto* t_flag = mf_phi->add_option("--t", t);
    auto* grid_flag = mf_phi->add_option("--t-grid", t_grid, "start:step:stop; emits CSV (t, phi, feasible, ...)");
    t_flag->excludes(grid_flag);

    // transport
    auto* tr = app.add_subcommand("transport", "optimal transport on the cube");
    tr->require_subcommand(1);
    std::string file_a, file_b, plan_path;
    auto* tr_w1 = tr->add_subcommand("w1", "exact W1 under Hamming cost");
    tr_w1->add_option("--a", file_a)->required();
    tr_w1->add_option("--b", file_b)->required();
    tr_w1->add_option("--plan", plan_path, "write the optimal plan as CSV (src, dst, mass, hamming)");

    // ld
    auto* ld = app.add_subcommand("ld", "large-deviation bounds");
    ld->require_subcommand(1);
    double phi = 0, phi_t = NAN, lipv = 0, cplx = 0, delta = 0;
    int n = 0;
    auto* ld_b = ld->add_subcommand("bound", "upper and lower bounds from phi, Lip and complexity");
    ld_b->add_option("--phi", phi, "phi_p(t - delta)")->required();
    ld_b->add_option("--phi-at-t", phi_t, "phi_p(t) for the lower bound (default: --phi)");
    ld_b->add_option("--lip", lipv)->required();
    ld_b->add_option("--complexity", cplx)->required();
    ld_b->add_option("--n", n)->required();
    ld_b->add_option("--p", p)->required();
    ld_b->add_option("--t", t)->required();
    ld_b->add_option("--delta", delta)->required();
    ModelFlags tail_model;
    auto* ld_t = ld->add_subcommand("tail", "exact log mu_p(f >= t n) by enumeration");
    tail_model.add(ld_t);
    ld_t->add_option("--p", p)->required();
    ld_t->add_option("--t", t)->required();

    // localize
    std::string measure_file, trace_path;
    double eps = 0.06, alpha = 2.0, dt = 1e-3, t_max = 20.0, threshold = -1.0, gw = -1.0;
    std::int64_t paths = 0, endpoint_paths = 0;
    bool report = false;
    auto* lz = app.add_subcommand("localize", "stochastic-localization tilt decomposition");
    lz->add_option("--measure", measure_file)->required();
    lz->add_option("--eps", eps);
    lz->add_option("--alpha", alpha);
    lz->add_option("--paths", paths, "atoms of the mixture")->required()->check(CLI::PositiveNumber);
    lz->add_option("--dt", dt);
    lz->add_option("--t-max", t_max);
    lz->add_option("--threshold", threshold, "replace the trace threshold 16 alpha GW / eps");
    lz->add_option("--gw", gw, "use this GW of {g(y)} instead of estimating it");
    lz->add_flag("--report", report, "invariant checks along paths");
    lz->add_option("--endpoint-paths", endpoint_paths, "also simulate this many endpoints and report the TV to nu");
    lz->add_option("--trace", trace_path, "CSV trace of path 0");
    seed_opt(lz);

    // gaussian
    auto* gs = app.add_subcommand("gaussian", "Gaussian-space mixtures");
    gs->require_subcommand(1);
    std::string mixture_file;
    int quad = 40, grid = 401;
    std::int64_t gw_samples = 20000;
    double radius = 1.0;
    auto* g_lsi = gs->add_subcommand("lsi", "reverse log-Sobolev check");
    auto* g_tilt = gs->add_subcommand("tilt", "tilt theorem for collinear centers");
    auto* g_fol = gs->add_subcommand("follmer", "Follmer process statistics");
    for (auto* s : {g_lsi, g_tilt, g_fol}) {
        s->add_option("--mixture", mixture_file)->required();
        seed_opt(s);
    }
    for (auto* s : {g_lsi, g_tilt}) s->add_option("--gw-samples", gw_samples);
    g_lsi->add_option("--quadrature", quad, "Gauss-Hermite points per dimension");
    g_tilt->add_option("--r", radius);
    g_tilt->add_option("--grid", grid);
    std::int64_t fpaths = 100000;
    g_fol->add_option("--dt", dt);
    g_fol->add_option("--paths", fpaths);

    // ergm
    auto* eg = app.add_subcommand("ergm", "exponential random graphs");
    eg->require_subcommand(1);
    std::string model_file;
    std::int64_t hamming = 16;
    double ergm_dt = 1e-4;
    auto* eg_d = eg->add_subcommand("decompose", "epsilon-mixture decomposition");
    eg_d->add_option("--model", model_file, "model JSON {N, terms: [{edges, beta}]}")->required();
    eg_d->add_option("--eps", eps);
    eg_d->add_option("--paths", paths)->required()->check(CLI::PositiveNumber);
    eg_d->add_option("--dt", ergm_dt);
    eg_d->add_option("--alpha", alpha);
    eg_d->add_option("--threshold", threshold);
    eg_d->add_option("--hamming-samples", hamming);
    seed_opt(eg_d);

    // verify
    std::string module = "all";
    auto* vf = app.add_subcommand("verify", "invariant suite; nonzero exit on any violation");
    vf->add_option("module", module, "all | cube_core | complexity | meanfield | transport | ld_bounds | localization_sim | gaussian_lsi | graphs");
    seed_opt(vf);

    // replay
    std::string replay_path;
    auto* rp = app.add_subcommand("replay", "re-run a manifest and compare the output digest");
    rp->add_option("--manifest", replay_path)->required();

    std::vector<std::string> args(argv, argv + argc);
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (threads < 0) threads = env_threads();
        if (mfld_set_threads(threads) != MFLD_OK) throw UsageError(mfld_last_error());
        if (rp->parsed()) return replay(replay_path, out_path);

        Json& r = job.request;
        auto seeded = [&] { r["seed"] = seed; };
        if (cx->parsed()) {
            job.command = "complexity";
            cx_model.fill(r);
            r["samples"] = samples;
            r["subsample"] = subsample;
            seeded();
        } else if (mf_solve->parsed() || mf_phi->parsed()) {
            job.command = mf_solve->parsed() ? "meanfield.solve" : "meanfield.phi";
            mf_model.fill(r);
            r["p"] = p;
            r["restarts"] = restarts;
            r["max_iterations"] = max_iter;
            seeded();
            if (mf_phi->parsed()) {
                if (!t_grid.empty()) {
                    r["t_grid"] = parse_grid(t_grid);
                    job.format = "phi_csv";
                } else if (t_flag->count()) {
                    r["t"] = t;
                } else {
                    throw UsageError("meanfield phi needs --t or --t-grid");
                }
            }
        } else if (tr_w1->parsed()) {
            job.command = "transport.w1";
            r["a"] = load_json(file_a);
            r["b"] = load_json(file_b);
            if (!plan_path.empty()) {
                r["plan"] = true;
                job.extracts.push_back({"plan_csv", plan_path});
            }
        } else if (ld_b->parsed()) {
            job.command = "ld.bound";
            r = {{"phi", phi}, {"lip", lipv}, {"complexity", cplx}, {"n", n}, {"p", p}, {"t", t}, {"delta", delta}};
            if (!std::isnan(phi_t)) r["phi_at_t"] = phi_t;
        } else if (ld_t->parsed()) {
            job.command = "ld.tail";
            tail_model.fill(r);
            r["p"] = p;
            r["t"] = t;
        } else if (lz->parsed()) {
            job.command = "localize";
            r = {{"measure", load_json(measure_file)}, {"eps", eps}, {"alpha", alpha}, {"paths", paths}, {"dt", dt},
                 {"t_max", t_max}, {"threshold_override", threshold}, {"gw", gw}, {"report", report}};
            if (endpoint_paths > 0) r["endpoint_paths"] = endpoint_paths;
            if (!trace_path.empty()) {
                r["trace"] = true;
                job.extracts.push_back({"trace_csv", trace_path});
            }
            seeded();
        } else if (g_lsi->parsed() || g_tilt->parsed() || g_fol->parsed()) {
            r["mixture"] = load_json(mixture_file);
            seeded();
            if (g_lsi->parsed()) {
                job.command = "gaussian.lsi";
                r["quadrature"] = quad;
                r["gw_samples"] = gw_samples;
            } else if (g_tilt->parsed()) {
                job.command = "gaussian.tilt";
                r["r"] = radius;
                r["grid"] = grid;
                r["gw_samples"] = gw_samples;
            } else {
                job.command = "gaussian.follmer";
                r["dt"] = dt;
                r["paths"] = fpaths;
            }
        } else if (eg_d->parsed()) {
            job.command = "ergm.decompose";
            r = {{"model", "subgraph"}, {"data", load_json(model_file)}, {"eps", eps}, {"paths", paths}, {"dt", ergm_dt},
                 {"alpha", alpha}, {"threshold_override", threshold}, {"hamming_samples", hamming}};
            seeded();
        } else if (vf->parsed()) {
            job.command = "verify";
            r = {{"module", module}};
            seeded();
        } else {
            throw UsageError("missing subcommand");
        }
        return execute(job, out_path, manifest_path, args, threads);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ComputeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
