#include "mfld/mfld.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "api/dispatch.hpp"
#include "mfld/error.hpp"
#include "mfld/parallel.hpp"
#include "mfld/sampler.hpp"

struct mfld_measure {
    mfld::CubeMeasure nu;
};

namespace {

thread_local std::string last_error;

mfld_status fail(mfld_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

// Runs body, translating exceptions into status codes.
template <class F>
mfld_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return MFLD_OK;
    } catch (const mfld::Error& e) {
        return fail(static_cast<mfld_status>(static_cast<int>(e.code())), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(MFLD_E_INVALID_ARGUMENT, std::string("malformed JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(MFLD_E_CAPACITY, "out of memory");
    } catch (const std::exception& e) {
        return fail(MFLD_E_INTERNAL, e.what());
    } catch (...) {
        return fail(MFLD_E_INTERNAL, "unknown failure");
    }
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    mfld::require(p != nullptr, mfld::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

mfld_measure* wrap(mfld::CubeMeasure nu) { return new mfld_measure{std::move(nu)}; }

}  // namespace

extern "C" {

MFLD_API const char* mfld_version(void) { return "0.1.0"; }

MFLD_API const char* mfld_last_error(void) { return last_error.c_str(); }

MFLD_API void mfld_string_free(char* s) { std::free(s); }

MFLD_API mfld_status mfld_set_threads(int threads) {
    return guarded([&] {
        mfld::require(threads >= 0, mfld::ErrorCode::InvalidArgument, "thread count must be >= 0");
        mfld::set_thread_count(threads);
    });
}

MFLD_API mfld_status mfld_run(const char* command, const char* request_json, char** response_json) {
    return guarded([&] {
        need(command, "command");
        need(request_json, "request");
        need(response_json, "response pointer");
        const auto request = mfld::Json::parse(request_json);
        const auto response = mfld::api::dispatch(command, request);
        *response_json = dup_string(response.dump());
    });
}

MFLD_API mfld_status mfld_measure_from_log_density(int n, const double* values, mfld_measure** out) {
    return guarded([&] {
        need(out, "out");
        mfld::check_cube_dim(n);
        need(values, "values");
        *out = wrap(mfld::CubeMeasure::from_log_density(n, std::vector<double>(values, values + mfld::cube_size(n))));
    });
}

MFLD_API mfld_status mfld_measure_from_json(const char* json, mfld_measure** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = wrap(mfld::measure_from_json(mfld::Json::parse(json)));
    });
}

MFLD_API mfld_status mfld_measure_uniform(int n, mfld_measure** out) {
    return guarded([&] {
        need(out, "out");
        *out = wrap(mfld::CubeMeasure::uniform(n));
    });
}

MFLD_API mfld_status mfld_measure_tilt(const mfld_measure* nu, const double* theta, mfld_measure** out) {
    return guarded([&] {
        need(nu, "measure");
        need(theta, "theta");
        need(out, "out");
        const mfld::Vector t = Eigen::Map<const mfld::Vector>(theta, nu->nu.dim());
        *out = wrap(mfld::tilt(nu->nu, t));
    });
}

MFLD_API void mfld_measure_free(mfld_measure* nu) { delete nu; }

MFLD_API mfld_status mfld_measure_dim(const mfld_measure* nu, int* n) {
    return guarded([&] {
        need(nu, "measure");
        need(n, "out");
        *n = nu->nu.dim();
    });
}

MFLD_API mfld_status mfld_measure_probabilities(const mfld_measure* nu, double* out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        const auto p = nu->nu.probabilities();
        std::copy(p.begin(), p.end(), out);
    });
}

MFLD_API mfld_status mfld_measure_g(const mfld_measure* nu, uint32_t vertex, double* out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        mfld::require(vertex < mfld::cube_size(nu->nu.dim()), mfld::ErrorCode::InvalidArgument, "vertex out of range");
        const mfld::Vector g = mfld::g_map(nu->nu, vertex);
        std::copy(g.data(), g.data() + g.size(), out);
    });
}

MFLD_API mfld_status mfld_measure_center(const mfld_measure* nu, double* out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        const mfld::Vector c = mfld::center_of_mass(nu->nu);
        std::copy(c.data(), c.data() + c.size(), out);
    });
}

MFLD_API mfld_status mfld_measure_h_matrix(const mfld_measure* nu, double* out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        const mfld::Matrix H = mfld::h_matrix(nu->nu);
        const int n = nu->nu.dim();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[i * n + j] = H(i, j);
    });
}

MFLD_API mfld_status mfld_measure_kl(const mfld_measure* a, const mfld_measure* b, double* out) {
    return guarded([&] {
        need(a, "measure");
        need(b, "measure");
        need(out, "out");
        *out = mfld::kl(a->nu, b->nu);
    });
}

MFLD_API mfld_status mfld_measure_w1(const mfld_measure* a, const mfld_measure* b, double* out) {
    return guarded([&] {
        need(a, "measure");
        need(b, "measure");
        need(out, "out");
        *out = mfld::w1_exact(a->nu, b->nu).value;
    });
}

MFLD_API mfld_status mfld_measure_step1_bound(const mfld_measure* nu, double* out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        *out = mfld::step1_bound(nu->nu);
    });
}

MFLD_API mfld_status mfld_measure_sample(const mfld_measure* nu, const double* u, uint32_t* out) {
    return guarded([&] {
        need(nu, "measure");
        need(u, "u");
        need(out, "out");
        const int n = nu->nu.dim();
        for (int i = 0; i < n; ++i)
            mfld::require(u[i] >= -1.0 && u[i] <= 1.0, mfld::ErrorCode::InvalidArgument, "u must lie in [-1,1]^n");
        *out = mfld::sequential_sample(nu->nu, std::span<const double>(u, static_cast<std::size_t>(n)));
    });
}

MFLD_API mfld_status mfld_measure_to_json(const mfld_measure* nu, char** out) {
    return guarded([&] {
        need(nu, "measure");
        need(out, "out");
        *out = dup_string(mfld::to_json(nu->nu).dump());
    });
}

}  // extern "C"
