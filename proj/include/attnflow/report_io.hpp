#pragma once

#include <string>

#include <json.hpp>

#include "attnflow/measures.hpp"
#include "attnflow/particles.hpp"
#include "attnflow/pde.hpp"

namespace attnflow {

// Long format: time,particle,theta for angular runs, time,particle,x0..x{d-1}
// otherwise.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

// time,cell,theta,density per snapshot.
void write_pde_csv(const std::string& path, const PdeRun& run);

nlohmann::json to_json(const PdeDiagnostics& d);
nlohmann::json to_json(const MeasureSummary& s, int modes = 16);
nlohmann::json to_json(const GegenbauerSpectrum& s, int modes = 16);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace attnflow
