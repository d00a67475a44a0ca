#pragma once

#include <string>

#include "json.hpp"

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"
#include "mfld/ergm.hpp"
#include "mfld/gaussian.hpp"
#include "mfld/graphs.hpp"
#include "mfld/ld_bounds.hpp"
#include "mfld/localization.hpp"
#include "mfld/meanfield.hpp"
#include "mfld/transport.hpp"

namespace mfld {

using Json = nlohmann::json;

// -inf log-density entries travel as null.
Json to_json(const CubeFunction& f);
Json to_json(const CubeMeasure& nu);
CubeFunction function_from_json(const Json& j);
// accepts kind "log_density" or "function" (the values are then read as a log-density)
CubeMeasure measure_from_json(const Json& j);

Json to_json(const GaussianMixture& nu);
GaussianMixture mixture_from_json(const Json& j);

// {N, terms: [{edges: [[u, v], ...], beta}]}, 1-based vertex labels
Json to_json(const SubgraphModel& m);
SubgraphModel subgraph_model_from_json(const Json& j);

// {A: [[...]], b: [...]}, or {curie_weiss: {n, beta, field}}
Json to_json(const IsingModel& m);
IsingModel ising_from_json(const Json& j);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const GwEstimate& e);
Json to_json(const SolveResult& r);
Json to_json(const PhiResult& r);
Json to_json(const LdBoundReport& r);
Json to_json(const W1Result& r);
Json to_json(const TiltMixture& m);
TiltMixture tilt_mixture_from_json(const Json& j);
Json to_json(const PathReport& r);
Json to_json(const EndpointStats& s);
Json to_json(const ErgmReport& r);
Json to_json(const LsiReport& r);
Json to_json(const TiltReport& r);
Json to_json(const FollmerStats& s);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mfld
