#pragma once

// JSON file formats for models, POVMs, and priors. Schema errors surface as
// validation errors carrying the file name and the offending field path.

#include "qest/measure.hpp"
#include "qest/qfi.hpp"
#include "qest/state_model.hpp"

#include <string>

namespace qest {

StateFamily load_model(const std::string& path);
POVM load_povm(const std::string& path);
Prior load_prior(const std::string& path);

// FNV-1a 64-bit hash of the raw file bytes, as 16 hex digits; echoed in CLI
// reports so runs can be tied to exact inputs.
std::string file_digest(const std::string& path);

}  // namespace qest
