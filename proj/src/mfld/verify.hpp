#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfld {

struct VerifyCheck {
    std::string module;
    std::string name;
    bool pass = false;
    double value = 0.0;  // the measured quantity (error, violation count, statistic)
    double limit = 0.0;  // what it was compared against
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool passed() const;
};

const std::vector<std::string>& verify_modules();
// module is one of verify_modules() or "all"; a few seconds per module
VerifyReport verify(const std::string& module, std::uint64_t seed);

}  // namespace mfld
