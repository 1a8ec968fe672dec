#pragma once

#include <string>

#include <json.hpp>

#include "chwfr/camassa_holm.hpp"
#include "chwfr/common.hpp"
#include "chwfr/wfr_dynamic.hpp"

namespace chwfr::io {

using Json = nlohmann::ordered_json;

/// %.17g; non-finite values become "inf", "-inf", "nan".
std::string format_double(double v);

/// Serializes with %.17g floats and keys in insertion order. Non-finite
/// numbers are written as null.
std::string dump_json(const Json& j, int indent = 2);

void write_density_csv(const std::string& path, const DensityField& rho);
/// Reads `x,value`; x must lie on the uniform grid 2 pi i / n.
DensityField read_density_csv(const std::string& path);

void write_trajectory_csv(const std::string& path, const CHTrajectory& traj);
/// Reads `t,x,u` written by write_trajectory_csv; dt is taken from the first
/// two sample times.
CHTrajectory read_trajectory_csv(const std::string& path, const ConeParams& params);

void write_flow_csv(const std::string& path, const FlowPath& path_data);

/// Cell-centred `t,x,rho,m,mu`.
void write_wfr_csv(const std::string& path, const WFRVariables& vars);

/// Initial-condition mini-language on an n-point grid:
///   const:c | sin:amp | bump:center,width,mass | file:path
Field parse_init(const std::string& spec, int n);

}  // namespace chwfr::io
