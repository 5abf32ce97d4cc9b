#pragma once

// JSON model configs and human-friendly size strings.

#include <string>

#include "json.hpp"
#include "rnnt/arch.hpp"

namespace rnnt {

// Parses a model description. Underscore-prefixed keys are annotations:
// _name, _assumptions (string list), _published {network_m, encoder_m} with
// published parameter totals in millions for cross-checking reports.
TransducerSpec spec_from_json(const nlohmann::json& j);

TransducerSpec load_spec(const std::string& path);

nlohmann::json spec_to_json(const TransducerSpec& spec);

// Accepts raw bytes ("524288"), binary units ("512KiB", "2MiB"), or
// parameter counts ("500Kparams", "2Mparams", "320000params") which are
// scaled by bytes_per_param. K/M on params are decimal (1e3/1e6).
i64 parse_buffer_size(const std::string& text, double bytes_per_param);

}  // namespace rnnt
