#pragma once

#include <span>
#include <string>

#include "dps/dpf.hpp"
#include "dps/experiments.hpp"
#include "dps/surface.hpp"

/**
 * Canonical text serialization. Every float is written with nine significant
 * digits ("%.9g"), so identical in-memory results round-trip to byte-identical
 * files. NaN renders as "nan" in CSV and null in JSON.
 */

namespace dps {

std::string format_double(double value);  // "%.9g"

std::string to_json(const ExactPotential& exact);
std::string to_json(const PotentialEstimate& estimate);
std::string to_json(const BoundReport& report);
std::string to_json(const CoverageReport& report);

// Header row plus one row per entry; exact column names match the row types.
std::string convergence_csv(std::span<const ConvergenceRow> rows);
std::string concentration_csv(std::span<const ConcentrationRow> rows);

// One JSON object per line, same field names as the CSV columns.
std::string convergence_jsonl(std::span<const ConvergenceRow> rows);
std::string concentration_jsonl(std::span<const ConcentrationRow> rows);

// Columns: i,j,u,v,phi,valid (i outer loop).
std::string grid_csv(const SurfaceGrid& grid);

// JSON array of {"level":..., "polylines":[[[u,v],...],...], "closed":[...]}.
std::string isohypses_json(std::span<const IsohypseSet> sets);

}  // namespace dps
