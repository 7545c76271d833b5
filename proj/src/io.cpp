#include "langevin/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "langevin/errors.hpp"

namespace langevin {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ensembles_to_csv(const std::vector<const SampleEnsemble*>& ensembles) {
  std::ostringstream out;
  const int d = ensembles.empty() ? 0 : ensembles.front()->dim();
  out << "chain";
  for (int a = 0; a < d; ++a) out << ",coord" << a;
  out << ",time\n";
  for (const SampleEnsemble* e : ensembles) {
    if (e->dim() != d) throw InputError("ensembles in one CSV must share a dimension");
    const std::string t = format_double(e->time);
    for (Eigen::Index i = 0; i < e->points.rows(); ++i) {
      out << i;
      for (int a = 0; a < d; ++a) out << ',' << format_double(e->points(i, a));
      out << ',' << t << '\n';
    }
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  f << text;
  if (!f) throw ConfigError("write failed: " + path.string());
}

void write_ensembles_csv(const std::filesystem::path& path,
                         const std::vector<const SampleEnsemble*>& ensembles) {
  write_text(path, ensembles_to_csv(ensembles));
}

CsvEnsembles read_ensembles_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open ensemble CSV: " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw InputError("empty ensemble CSV: " + path.string());

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header.front() != "chain" || header.back() != "time") {
    throw InputError("ensemble CSV header must be chain,coord0..,time");
  }
  const int d = static_cast<int>(header.size()) - 2;
  for (int a = 0; a < d; ++a) {
    if (header[a + 1] != "coord" + std::to_string(a)) throw InputError("bad coordinate column name");
  }

  std::map<double, std::vector<std::pair<long long, std::vector<double>>>> rows;
  long long lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("bad number on line " + std::to_string(lineno));
      }
    }
    if (static_cast<int>(values.size()) != d + 2) {
      throw InputError("wrong column count on line " + std::to_string(lineno));
    }
    rows[values.back()].push_back(
        {static_cast<long long>(values.front()), {values.begin() + 1, values.end() - 1}});
  }

  CsvEnsembles out;
  out.dim = d;
  for (auto& [time, group] : rows) {
    std::sort(group.begin(), group.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    PointMatrix pts(static_cast<Eigen::Index>(group.size()), d);
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (int a = 0; a < d; ++a) pts(static_cast<Eigen::Index>(i), a) = group[i].second[a];
    }
    out.times.push_back(time);
    out.points.push_back(std::move(pts));
  }
  return out;
}

nlohmann::json to_json(const GaussianMoments& m) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.cov.rows(); ++i) {
    std::vector<double> row(m.cov.cols());
    for (Eigen::Index k = 0; k < m.cov.cols(); ++k) row[k] = m.cov(i, k);
    cov.push_back(row);
  }
  j["cov"] = cov;
  return j;
}

GaussianMoments gaussian_from_json(const nlohmann::json& j) {
  try {
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto cov = j.at("cov").get<std::vector<std::vector<double>>>();
    GaussianMoments m;
    m.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.cov.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < cov.size(); ++i) {
      if (cov[i].size() != mean.size()) throw InputError("covariance row length mismatch");
      for (std::size_t k = 0; k < mean.size(); ++k) {
        m.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cov[i][k];
      }
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad gaussian JSON: ") + e.what());
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace langevin
