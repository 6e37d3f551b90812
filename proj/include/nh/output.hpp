#pragma once

#include <string>

#include "nh/config.hpp"
#include "nh/lifting.hpp"

namespace nh {

/// Legacy ASCII VTK unstructured-grid snapshot: point data (displacement,
/// temperature), cell data (quadrature-averaged stress components, |dev T|,
/// yield excess). All floats carry 17 significant digits.
void write_vtk_snapshot(const std::string& path, const FESpace& space,
                        const FieldsState& state, const MaterialModel& model);

void write_ledger_csv(const std::string& path,
                      const std::vector<EnergyLedger>& ledgers);
void write_bounds_csv(const std::string& path, const BoundReport& report);
void write_kstudy_csv(const std::string& path, const KStudy& study);

/// Full output set of one run under config.output.directory.
void write_outputs(const RunConfig& config, const FESpace& space,
                   const MaterialModel& model, const Trajectory& trajectory);

void write_lifting_outputs(const std::string& directory, const FESpace& space,
                           const DisplacementLifting& du,
                           const TemperatureLifting& dtheta);

std::string format_double(double v); // shortest 17-significant-digit form

} // namespace nh
