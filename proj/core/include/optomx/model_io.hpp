#pragma once

#include <string>

#include "optomx/model_selection.hpp"

namespace optomx {

// Binary pipeline container: magic "OPTX", format version, config hash and
// seed, selector and classifier tags, standardizer block, selected-index
// block, kind-specific parameter block, trailing CRC-32. Doubles are
// stored as raw little-endian bits, so save -> load -> predict is
// bit-identical to the in-memory pipeline.
void save_pipeline(const std::string& path, const TrainedPipeline& p);
TrainedPipeline load_pipeline(const std::string& path);

}  // namespace optomx
