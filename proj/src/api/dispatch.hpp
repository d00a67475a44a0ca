#pragma once

#include <string>

#include "mfld/serialize.hpp"

namespace mfld::api {

// Runs one command on a parsed request; throws mfld::Error on failure.
Json dispatch(const std::string& command, const Json& request);

}  // namespace mfld::api
