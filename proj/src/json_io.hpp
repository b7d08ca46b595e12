// Internal JSON helpers shared by the metrics cache and the report writer.

#pragma once

#include <json.hpp>

#include "lexstab/comparative.hpp"
#include "lexstab/matrix.hpp"
#include "lexstab/metrics.hpp"

namespace lexstab::detail {

using Json = nlohmann::ordered_json;

Json to_json(const DStatResult& r);
DStatResult dstat_from_json(const Json& j);

Json to_json(const MeaningClassMetrics& m);
MeaningClassMetrics metrics_from_json(const Json& j);

/// Rows of a matrix as nested arrays.
Json rows_of(const Matrix& m);

}  // namespace lexstab::detail
