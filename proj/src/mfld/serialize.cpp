#include "mfld/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"

namespace mfld {

namespace {

const Json& field(const Json& j, const char* key) {
    require(j.is_object() && j.contains(key), ErrorCode::InvalidArgument, std::string("JSON: missing field '") + key + "'");
    return j.at(key);
}

double number(const Json& j, const char* what) {
    require(j.is_number(), ErrorCode::InvalidArgument, std::string("JSON: ") + what + " must be a number");
    return j.get<double>();
}

// +-inf are not representable in JSON
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const CubeFunction& f) {
    return Json{{"kind", "function"}, {"n", f.dim()}, {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

Json to_json(const CubeMeasure& nu) {
    Json vals = Json::array();
    for (double v : nu.log_density()) vals.push_back(finite_or_null(v));
    return Json{{"kind", "log_density"}, {"n", nu.dim()}, {"values", vals}};
}

CubeFunction function_from_json(const Json& j) {
    const int n = static_cast<int>(number(field(j, "n"), "n"));
    const Json& vals = field(j, "values");
    require(vals.is_array(), ErrorCode::InvalidArgument, "JSON: values must be an array");
    std::vector<double> v;
    v.reserve(vals.size());
    for (const auto& e : vals) v.push_back(number(e, "function value"));
    return CubeFunction(n, std::move(v));
}

CubeMeasure measure_from_json(const Json& j) {
    const std::string kind = j.value("kind", std::string("log_density"));
    require(kind == "log_density" || kind == "function", ErrorCode::InvalidArgument, "JSON: unknown measure kind '" + kind + "'");
    const int n = static_cast<int>(number(field(j, "n"), "n"));
    const Json& vals = field(j, "values");
    require(vals.is_array(), ErrorCode::InvalidArgument, "JSON: values must be an array");
    std::vector<double> v;
    v.reserve(vals.size());
    for (const auto& e : vals) v.push_back(e.is_null() ? kNegInf : number(e, "log-density value"));
    return CubeMeasure::from_log_density(n, std::move(v));
}

Json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

Vector vector_from_json(const Json& j) {
    require(j.is_array(), ErrorCode::InvalidArgument, "JSON: expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], "vector entry");
    return v;
}

Matrix matrix_from_json(const Json& j) {
    require(j.is_array(), ErrorCode::InvalidArgument, "JSON: expected an array of rows");
    if (j.empty()) return Matrix(0, 0);
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_array() && j[i].size() == cols, ErrorCode::InvalidArgument, "JSON: ragged matrix");
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = number(j[i][k], "matrix entry");
    }
    return m;
}

Json to_json(const GaussianMixture& nu) { return Json{{"weights", nu.weights()}, {"centers", to_json(nu.centers())}}; }

GaussianMixture mixture_from_json(const Json& j) {
    const Json& w = field(j, "weights");
    require(w.is_array(), ErrorCode::InvalidArgument, "JSON: weights must be an array");
    std::vector<double> weights;
    for (const auto& e : w) weights.push_back(number(e, "weight"));
    return GaussianMixture(std::move(weights), matrix_from_json(field(j, "centers")));
}

Json to_json(const SubgraphModel& m) {
    Json terms = Json::array();
    for (const auto& t : m.terms) {
        Json edges = Json::array();
        for (auto [a, b] : t.h.edges) edges.push_back({a + 1, b + 1});
        terms.push_back(Json{{"edges", edges}, {"vertices", t.h.vertices}, {"beta", t.beta}});
    }
    return Json{{"N", m.N}, {"terms", terms}};
}

SubgraphModel subgraph_model_from_json(const Json& j) {
    SubgraphModel m;
    m.N = static_cast<int>(number(field(j, "N"), "N"));
    const Json& terms = field(j, "terms");
    require(terms.is_array(), ErrorCode::InvalidArgument, "JSON: terms must be an array");
    for (const auto& t : terms) {
        SubgraphTerm term;
        term.beta = number(field(t, "beta"), "beta");
        if (t.contains("complete")) {
            term.h = SimpleGraph::complete(static_cast<int>(number(t.at("complete"), "complete")));
        } else {
            std::vector<std::pair<int, int>> edges;
            int vmax = 0;
            for (const auto& e : field(t, "edges")) {
                require(e.is_array() && e.size() == 2, ErrorCode::InvalidArgument, "JSON: edges are [u, v] pairs");
                const int u = static_cast<int>(number(e[0], "edge endpoint")), v = static_cast<int>(number(e[1], "edge endpoint"));
                require(u >= 1 && v >= 1, ErrorCode::InvalidArgument, "JSON: edge labels are 1-based");
                edges.push_back({u - 1, v - 1});
                vmax = std::max({vmax, u, v});
            }
            const int vertices = t.contains("vertices") ? static_cast<int>(number(t.at("vertices"), "vertices")) : vmax;
            term.h = SimpleGraph(std::max(vertices, 1), std::move(edges));
        }
        m.terms.push_back(std::move(term));
    }
    m.validate();
    return m;
}

Json to_json(const IsingModel& m) { return Json{{"A", to_json(m.A)}, {"b", to_json(m.b)}}; }

IsingModel ising_from_json(const Json& j) {
    if (j.contains("curie_weiss")) {
        const Json& c = j.at("curie_weiss");
        return IsingModel::curie_weiss(static_cast<int>(number(field(c, "n"), "n")), number(field(c, "beta"), "beta"),
                                       c.contains("field") ? number(c.at("field"), "field") : 0.0);
    }
    IsingModel m{matrix_from_json(field(j, "A")), Vector()};
    m.b = j.contains("b") ? vector_from_json(j.at("b")) : Vector::Zero(m.A.rows());
    m.validate();
    return m;
}

Json to_json(const GwEstimate& e) {
    Json j{{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}};
    if (e.lower_estimate) j["lower_estimate"] = true;
    return j;
}

Json to_json(const SolveResult& r) {
    return Json{{"objective", r.objective}, {"mean", to_json(r.mean)}, {"converged", r.converged},
                {"iterations", r.iterations}, {"restarts_used", r.restarts_used}};
}

Json to_json(const PhiResult& r) {
    return Json{{"phi", finite_or_null(r.phi)},
                {"lambda", r.lambda},
                {"feasible", r.feasible},
                {"diagnostics",
                 {{"converged", r.converged},
                  {"boundary", r.boundary},
                  {"upper_bound_only", r.upper_bound_only},
                  {"constraint_value", r.constraint_value},
                  {"mean", to_json(r.mean)},
                  {"note", r.note}}}};
}

Json to_json(const LdBoundReport& r) {
    return Json{{"t", r.t},
                {"delta", r.delta},
                {"p", r.p},
                {"phi_lower_arg", r.phi_lower_arg},
                {"phi_at_t", r.phi_at_t},
                {"L", r.L},
                {"upper_bound", r.upper_bound},
                {"lower_bound", r.lower_bound},
                {"vacuous_upper", r.vacuous_upper},
                {"upper_hypothesis_ok", r.upper_hypothesis_ok},
                {"hypothesis_ok_lower", r.hypothesis_ok_lower}};
}

Json to_json(const W1Result& r) {
    return Json{{"w1", r.value}, {"dual_value", r.dual_value}, {"pruned_mass", r.pruned_mass},
                {"plan_entries", r.plan.flow.size()}, {"plan_cost", r.plan.cost}};
}

Json to_json(const TiltMixture& m) {
    Json atoms = Json::array();
    for (const auto& a : m.atoms)
        atoms.push_back(Json{{"theta", to_json(a.theta)}, {"weight", a.weight}, {"tau", a.tau}, {"trace", a.trace}, {"reason", a.reason}});
    const auto& d = m.diagnostics;
    return Json{{"n", m.n},
                {"eps", m.eps},
                {"atoms", atoms},
                {"diagnostics",
                 {{"gw", d.gw},
                  {"threshold", d.threshold},
                  {"fraction_below_threshold", d.fraction_below_threshold},
                  {"target_fraction", d.target_fraction},
                  {"stopped", {{"trace", d.stopped_trace}, {"norm", d.stopped_norm}, {"frozen", d.stopped_frozen}, {"horizon", d.stopped_horizon}}},
                  {"max_theta_norm", d.max_theta_norm},
                  {"max_theta_inf", d.max_theta_inf}}}};
}

TiltMixture tilt_mixture_from_json(const Json& j) {
    TiltMixture m;
    m.n = static_cast<int>(number(field(j, "n"), "n"));
    m.eps = j.value("eps", 0.0);
    for (const auto& a : field(j, "atoms")) {
        TiltAtom atom;
        atom.theta = vector_from_json(field(a, "theta"));
        require(atom.theta.size() == m.n, ErrorCode::InvalidArgument, "JSON: atom dimension mismatch");
        atom.weight = number(field(a, "weight"), "weight");
        m.atoms.push_back(std::move(atom));
    }
    return m;
}

Json to_json(const PathReport& r) {
    Json div = Json::array();
    for (const auto& d : r.divergence) div.push_back(Json{{"alpha", d.alpha}, {"t", d.t}, {"fraction", d.fraction}, {"std_error", d.std_error}});
    return Json{{"paths", r.paths},
                {"states", r.states},
                {"htat_violations", r.htat_violations},
                {"max_htat_ratio", r.max_htat_ratio},
                {"max_trace_gap", r.max_trace_gap},
                {"hull_violations", r.hull_violations},
                {"max_hull_excess", r.max_hull_excess},
                {"gw", r.gw},
                {"divergence", div},
                {"max_ito_drift", r.max_ito_drift},
                {"max_mean_g_dev_sigma", finite_or_null(r.max_mean_g_dev_sigma)}};
}

Json to_json(const EndpointStats& s) {
    return Json{{"paths", s.paths}, {"truncated", s.truncated}, {"mean_steps", s.mean_steps}};
}

Json to_json(const ErgmReport& r) {
    return Json{{"mixture", to_json(r.mixture)},
                {"eps_localization", r.eps_localization},
                {"entropy", r.entropy},
                {"mixture_edge_entropy", r.mixture_edge_entropy},
                {"entropy_budget", r.entropy_budget},
                {"entropy_ok", r.entropy_ok},
                {"hamming", to_json(r.hamming)},
                {"hamming_bound", r.hamming_bound},
                {"hamming_ok", r.hamming_ok}};
}

Json to_json(const LsiReport& r) {
    return Json{{"fisher", r.fisher}, {"kl", r.kl}, {"gw", r.gw}, {"gw_std_error", r.gw_std_error}, {"m_term", r.m_term},
                {"lhs", r.lhs}, {"rhs", r.rhs}, {"satisfied", r.satisfied}, {"converged", r.converged},
                {"quadrature_delta", r.quadrature_delta}};
}

Json to_json(const TiltReport& r) {
    return Json{{"x0", to_json(r.x0)}, {"tr_nabla_v", r.tr_nabla_v}, {"w2_sq", r.w2_sq}, {"gw", r.gw},
                {"gw_std_error", r.gw_std_error}, {"inf_laplacian", r.inf_laplacian}, {"rhs", r.rhs},
                {"slack", r.slack}, {"satisfied", r.satisfied}};
}

Json to_json(const FollmerStats& s) {
    Json curve = Json::array();
    for (const auto& c : s.curve)
        curve.push_back(Json{{"t", c.t}, {"mean_tr_h", c.mean_tr_h}, {"std_error", c.std_error}, {"bound", c.bound}, {"ok", c.ok}});
    return Json{{"paths", s.paths},
                {"dt", s.dt},
                {"energy", s.energy},
                {"energy_std_error", s.energy_std_error},
                {"two_kl", s.two_kl},
                {"representation_ok", s.representation_ok},
                {"ks", s.ks},
                {"ks_critical", s.ks_critical},
                {"curve", curve},
                {"gw", s.gw},
                {"m_term", s.m_term},
                {"max_v_drift_sigma", s.max_v_drift_sigma}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
    require(static_cast<bool>(out), ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace mfld
