#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "langevin/gaussian.hpp"
#include "langevin/samplers.hpp"

namespace langevin {

/// Shortest decimal form with 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Columnar ensemble CSV: header `chain,coord0,...,coord{d-1},time`, one row
/// per chain per ensemble, ensembles in the given order.
std::string ensembles_to_csv(const std::vector<const SampleEnsemble*>& ensembles);
void write_ensembles_csv(const std::filesystem::path& path,
                         const std::vector<const SampleEnsemble*>& ensembles);

/// Parsed ensemble CSV. Rows are grouped by their time column.
struct CsvEnsembles {
  int dim = 0;
  std::vector<double> times;  // ascending, distinct
  std::vector<PointMatrix> points;  // one per time, rows ordered by chain id
};

CsvEnsembles read_ensembles_csv(const std::filesystem::path& path);

nlohmann::json to_json(const GaussianMoments& m);
GaussianMoments gaussian_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace langevin
