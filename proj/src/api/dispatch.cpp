#include "api/dispatch.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/verify.hpp"

namespace mfld::api {

namespace {

const Json& need(const Json& r, const char* key) {
    require(r.is_object() && r.contains(key), ErrorCode::InvalidArgument, std::string("request is missing '") + key + "'");
    return r.at(key);
}

double num(const Json& r, const char* key) {
    const Json& v = need(r, key);
    require(v.is_number(), ErrorCode::InvalidArgument, std::string("'") + key + "' must be a number");
    return v.get<double>();
}

double num_or(const Json& r, const char* key, double fallback) { return r.contains(key) ? num(r, key) : fallback; }

std::int64_t count(const Json& r, const char* key, std::int64_t fallback = -1) {
    if (!r.contains(key)) {
        require(fallback >= 0, ErrorCode::InvalidArgument, std::string("request is missing '") + key + "'");
        return fallback;
    }
    const Json& v = r.at(key);
    require(v.is_number_integer() || (v.is_number() && std::floor(v.get<double>()) == v.get<double>()),
            ErrorCode::InvalidArgument, std::string("'") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

// seeds are mandatory for every stochastic command
std::uint64_t seed_of(const Json& r) {
    const Json& v = need(r, "seed");
    require(v.is_number_integer(), ErrorCode::InvalidArgument, "'seed' must be an integer");
    return v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<std::int64_t>());
}

std::string model_kind(const Json& r) {
    const Json& m = need(r, "model");
    require(m.is_string(), ErrorCode::InvalidArgument, "'model' must be a string");
    return m.get<std::string>();
}

SubgraphModel subgraph_of(const Json& r, const std::string& kind) {
    if (kind == "triangle") return SubgraphModel::triangle(static_cast<int>(count(r, "N")));
    return subgraph_model_from_json(need(r, "data"));
}

// dense table of the requested model
CubeFunction model_function(const Json& r) {
    const std::string kind = model_kind(r);
    if (kind == "table") {
        const Json& d = need(r, "data");
        if (d.value("kind", std::string("function")) == "log_density") {
            const CubeMeasure nu = measure_from_json(d);
            return CubeFunction(nu.dim(), std::vector<double>(nu.log_density().begin(), nu.log_density().end()));
        }
        return function_from_json(d);
    }
    if (kind == "ising") return ising_from_json(need(r, "data")).table();
    if (kind == "subgraph" || kind == "triangle") return model_table(subgraph_of(r, kind));
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + kind + "' (table | ising | subgraph | triangle)");
}

std::shared_ptr<const ProductObjective> model_objective(const Json& r) {
    const std::string kind = model_kind(r);
    if (kind == "subgraph" || kind == "triangle") return std::make_shared<SubgraphObjective>(subgraph_of(r, kind));
    if (kind == "ising") return std::make_shared<IsingObjective>(ising_from_json(need(r, "data")));
    return std::make_shared<TableObjective>(model_function(r));
}

Json complexity(const Json& r) {
    const std::string kind = model_kind(r);
    GwOptions opt;
    opt.samples = count(r, "samples", 10000);
    opt.seed = seed_of(r);
    opt.subsample = static_cast<std::size_t>(count(r, "subsample", 0));
    const CubeFunction f = model_function(r);
    Json out = to_json(gw_monte_carlo(GradientSet::of_function(f), opt));
    out["n"] = f.dim();
    out["lip"] = lip(f);
    if (kind == "ising") {
        const IsingModel m = ising_from_json(need(r, "data"));
        out["analytic_bound"] = ising_complexity_bound(m.A, m.b);
        out["lip_bound"] = ising_lip_bound(m.A, m.b);
    } else if (kind == "subgraph" || kind == "triangle") {
        const SubgraphModel m = subgraph_of(r, kind);
        double b = 0.0;
        for (const auto& t : m.terms) b += std::abs(t.beta) * subgraph_complexity_bound(t.h, m.N);
        if (kind == "triangle") b = std::min(b, 5.0 * std::pow(static_cast<double>(m.dim()), 0.75));
        out["analytic_bound"] = b;
    }
    return out;
}

MeanFieldProblem problem_of(const Json& r) {
    MeanFieldProblem prob;
    prob.f = model_objective(r);
    prob.p = num_or(r, "p", 0.5);
    prob.options.seed = seed_of(r);
    prob.options.restarts = static_cast<int>(count(r, "restarts", 16));
    prob.options.max_iterations = static_cast<int>(count(r, "max_iterations", 2000));
    prob.options.tolerance = num_or(r, "tolerance", 1e-10);
    prob.validate();
    return prob;
}

Json meanfield_solve(const Json& r) {
    const MeanFieldProblem prob = problem_of(r);
    Json out = to_json(solve_gibbs(prob));
    if (const auto* t = dynamic_cast<const TableObjective*>(prob.f.get())) out["log_partition"] = log_partition(t->function(), prob.p);
    if (const auto* t = dynamic_cast<const IsingObjective*>(prob.f.get()); t && t->dim() <= 20)
        out["log_partition"] = log_partition(t->model().table(), prob.p);
    return out;
}

Json meanfield_phi(const Json& r) {
    const MeanFieldProblem prob = problem_of(r);
    if (r.contains("t_grid")) {
        Json rows = Json::array();
        for (const auto& t : need(r, "t_grid")) {
            require(t.is_number(), ErrorCode::InvalidArgument, "'t_grid' entries must be numbers");
            Json row = to_json(rate_function_phi(prob, t.get<double>()));
            row["t"] = t;
            rows.push_back(row);
        }
        return Json{{"rows", rows}};
    }
    Json out = to_json(rate_function_phi(prob, num(r, "t")));
    out["t"] = num(r, "t");
    return out;
}

Json transport_w1(const Json& r) {
    const CubeMeasure a = measure_from_json(need(r, "a")), b = measure_from_json(need(r, "b"));
    const W1Result w = w1_exact(a, b);
    Json out = to_json(w);
    out["tv"] = tv_distance(a, b);
    if (r.value("plan", false)) out["plan_csv"] = w.plan.to_csv();
    return out;
}

Json ld_bound(const Json& r) {
    const double phi = num(r, "phi");
    const LdBoundReport rep = ld_report(phi, num_or(r, "phi_at_t", phi), num(r, "lip"), num(r, "complexity"),
                                        static_cast<int>(count(r, "n")), num(r, "p"), num(r, "t"), num(r, "delta"));
    return to_json(rep);
}

Json ld_tail(const Json& r) {
    const CubeFunction f = model_function(r);
    const double p = num(r, "p"), t = num(r, "t");
    const double v = exact_tail(f, p, t);
    return Json{{"log_probability", v == kNegInf ? Json(nullptr) : Json(v)}, {"empty", v == kNegInf}, {"n", f.dim()}, {"p", p}, {"t", t}};
}

SdeConfig sde_config(const Json& r) {
    SdeConfig cfg;
    cfg.nu = measure_from_json(need(r, "measure"));
    cfg.seed = seed_of(r);
    cfg.eps = num_or(r, "eps", cfg.eps);
    cfg.alpha = num_or(r, "alpha", cfg.alpha);
    cfg.dt = num_or(r, "dt", cfg.dt);
    cfg.t_max = num_or(r, "t_max", cfg.t_max);
    cfg.check_every = static_cast<int>(count(r, "check_every", cfg.check_every));
    cfg.gw = num_or(r, "gw", cfg.gw);
    cfg.gw_samples = count(r, "gw_samples", cfg.gw_samples);
    cfg.threshold_override = num_or(r, "threshold_override", cfg.threshold_override);
    cfg.validate();
    return cfg;
}

std::string trace_csv(const SdePath& path, int n) {
    std::ostringstream os;
    os.precision(17);
    os << "t";
    for (const char* col : {"x", "frozen", "v", "g"})
        for (int i = 0; i < n; ++i) os << ',' << col << i;
    os << '\n';
    for (const auto& s : path.samples) {
        os << s.t;
        for (int i = 0; i < n; ++i) os << ',' << s.x[i];
        for (int i = 0; i < n; ++i) os << ',' << int(s.frozen[i]);
        for (int i = 0; i < n; ++i) os << ',' << s.v[i];
        for (int i = 0; i < n; ++i) os << ',' << s.g[i];
        os << '\n';
    }
    return os.str();
}

Json localize(const Json& r) {
    const SdeConfig cfg = sde_config(r);
    const std::int64_t paths = count(r, "paths");
    const TiltMixture mix = decompose(cfg, paths);
    Json out = to_json(mix);
    const auto law = mixture_law(cfg.nu, mix);
    out["reconstruction_tv"] = tv_distance(law, cfg.nu.probabilities());
    const double kl = kl_to_uniform(cfg.nu), avg = mixture_average_kl(cfg.nu, mix);
    out["entropy"] = {{"kl", kl}, {"mixture_average_kl", avg}, {"gap", std::abs(kl - avg)}, {"budget", 2.0 * cfg.eps * cfg.nu.dim()}};
    if (r.value("report", false)) {
        const auto rep = along_path_report(cfg, count(r, "report_paths", std::min<std::int64_t>(paths, 200)), {2.0, 4.0, 8.0},
                                           {0.25, 0.5, 1.0, 2.0});
        out["path_report"] = to_json(rep);
    }
    if (r.contains("endpoint_paths")) {
        EndpointStats st;
        const auto law_end = endpoint_law(cfg, count(r, "endpoint_paths"), &st);
        out["endpoint"] = to_json(st);
        out["endpoint"]["tv"] = tv_distance(law_end, cfg.nu.probabilities());
    }
    if (r.value("trace", false)) out["trace_csv"] = trace_csv(simulate_path(cfg, 0), cfg.nu.dim());
    return out;
}

Json gaussian_lsi(const Json& r) {
    return to_json(reverse_lsi_check(mixture_from_json(need(r, "mixture")), static_cast<int>(count(r, "quadrature", 40)),
                                     count(r, "gw_samples", 20000), seed_of(r)));
}

Json gaussian_tilt(const Json& r) {
    return to_json(gaussian_tilt_search(mixture_from_json(need(r, "mixture")), num_or(r, "r", 1.0),
                                        static_cast<int>(count(r, "grid", 401)), count(r, "gw_samples", 20000), seed_of(r)));
}

Json gaussian_follmer(const Json& r) {
    return to_json(gaussian_follmer_simulate(mixture_from_json(need(r, "mixture")), num_or(r, "dt", 1e-3),
                                             count(r, "paths", 100000), seed_of(r)));
}

Json ergm(const Json& r) {
    ErgmOptions opt;
    opt.eps = num_or(r, "eps", opt.eps);
    opt.paths = count(r, "paths", opt.paths);
    opt.seed = seed_of(r);
    opt.dt = num_or(r, "dt", opt.dt);
    opt.alpha = num_or(r, "alpha", opt.alpha);
    opt.threshold_override = num_or(r, "threshold_override", opt.threshold_override);
    opt.hamming_samples = count(r, "hamming_samples", opt.hamming_samples);
    const std::string kind = r.contains("model") ? model_kind(r) : std::string("subgraph");
    return to_json(ergm_decompose(subgraph_of(r, kind), opt));
}

Json run_verify(const Json& r) {
    const VerifyReport rep = verify(r.value("module", std::string("all")), seed_of(r));
    Json checks = Json::array();
    for (const auto& c : rep.checks)
        checks.push_back(Json{{"module", c.module}, {"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
    return Json{{"passed", rep.passed()}, {"checks", checks}};
}

}  // namespace

Json dispatch(const std::string& command, const Json& request) {
    static const std::map<std::string, std::function<Json(const Json&)>> table = {
        {"complexity", complexity},
        {"meanfield.solve", meanfield_solve},
        {"meanfield.phi", meanfield_phi},
        {"transport.w1", transport_w1},
        {"ld.bound", ld_bound},
        {"ld.tail", ld_tail},
        {"localize", localize},
        {"gaussian.lsi", gaussian_lsi},
        {"gaussian.tilt", gaussian_tilt},
        {"gaussian.follmer", gaussian_follmer},
        {"ergm.decompose", ergm},
        {"verify", run_verify},
    };
    const auto it = table.find(command);
    require(it != table.end(), ErrorCode::InvalidArgument, "unknown command '" + command + "'");
    require(request.is_object(), ErrorCode::InvalidArgument, "request must be a JSON object");
    return it->second(request);
}

}  // namespace mfld::api
