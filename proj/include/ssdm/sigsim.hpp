#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssdm/common.hpp"
#include "ssdm/io.hpp"
#include "ssdm/rng.hpp"

namespace ssdm {

// ---------------------------------------------------------------------------
// Rate matrices and stepwise traces
// ---------------------------------------------------------------------------

/// Continuous-time transition rate matrix. Row i holds the rates of leaving
/// state i: off-diagonal m_ij >= 0 is the rate of the i -> j transition,
/// the diagonal m_ii = -sum_j m_ij is the (negative) total escape rate, so
/// the mean dwell in state i is 1/|m_ii|. Rates are in events per sample
/// interval.
struct RateMatrix {
  int k = 0;                    // state count
  std::vector<double> entries;  // row-major k*k

  double operator()(int i, int j) const { return entries[i * k + j]; }
  double& operator()(int i, int j) { return entries[i * k + j]; }
};

constexpr double kRowSumTol = 1e-9;

/// Checks all RateMatrix invariants. Returns an explanation of the first
/// violation, or nullopt when the matrix is valid.
inline std::optional<std::string> validate_rate_matrix(const RateMatrix& m) {
  if (m.k < 2 || m.k > 6)
    return "state count must be in [2,6], got " + std::to_string(m.k);
  if (m.entries.size() != static_cast<std::size_t>(m.k) * m.k)
    return "matrix is not square: " + std::to_string(m.entries.size()) +
           " entries for k=" + std::to_string(m.k);
  for (int i = 0; i < m.k; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m.k; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v))
        return "row " + std::to_string(i) + " has a non-finite entry";
      if (i == j && v >= 0.0)
        return "diagonal must be negative, row " + std::to_string(i) +
               " has " + std::to_string(v);
      if (i != j && v < 0.0)
        return "off-diagonal must be non-negative, entry (" +
               std::to_string(i) + "," + std::to_string(j) + ") is " +
               std::to_string(v);
      row_sum += v;
    }
    if (std::abs(row_sum) > kRowSumTol)
      return "row " + std::to_string(i) + " sums to " +
             std::to_string(row_sum) + ", expected 0";
  }
  return std::nullopt;
}

inline void require_valid(const RateMatrix& m) {
  if (auto err = validate_rate_matrix(m))
    throw ValidationError("rate matrix: " + *err);
}

/// Discrete state indices sampled on a uniform grid.
struct StatePath {
  std::vector<int> states;
  std::size_t size() const { return states.size(); }
};

/// Piecewise-constant trace with normalized levels i/(k-1) in [0,1].
struct StepwiseTrace {
  std::vector<double> values;
  StatePath path;
  int k = 0;
};

/// Normalized level of state i among k states.
inline double level_of_state(int i, int k) {
  return static_cast<double>(i) / static_cast<double>(k - 1);
}

/// The k canonical levels {0, 1/(k-1), ..., 1}.
inline std::vector<double> levels_for_state_count(int k) {
  if (k < 2) throw ValidationError("state count must be >= 2");
  std::vector<double> levels(k);
  for (int i = 0; i < k; ++i) levels[i] = level_of_state(i, k);
  return levels;
}

/// Gillespie simulation of the CTMC defined by `m`, sampled-and-held on the
/// grid {0, dt, ..., (n-1)*dt}. The initial state is uniform over {0..k-1}.
/// Dwell in state i is Exp(|m_ii|); the next state j != i is chosen with
/// probability m_ij/|m_ii|. Pure function of (m, n, dt, seed).
inline StatePath simulate_ctmc(const RateMatrix& m, std::size_t n, double dt,
                               std::uint64_t seed) {
  require_valid(m);
  if (n < 2) throw ValidationError("trace length must be >= 2");
  if (!(dt > 0.0)) throw ValidationError("sample interval must be > 0");

  Rng rng(seed);
  StatePath path;
  path.states.resize(n);

  int state = static_cast<int>(rng.integer(static_cast<std::uint64_t>(m.k)));
  double now = 0.0;
  double next_jump = now + rng.exponential(-m(state, state));

  for (std::size_t i = 0; i < n; ++i) {
    const double t_grid = static_cast<double>(i) * dt;
    while (next_jump <= t_grid) {
      // Jump: pick the destination proportionally to the off-diagonal rates.
      const double escape = -m(state, state);
      double u = rng.uniform() * escape;
      int next_state = -1;
      for (int j = 0; j < m.k; ++j) {
        if (j == state) continue;
        u -= m(state, j);
        if (u <= 0.0) {
          next_state = j;
          break;
        }
      }
      if (next_state < 0) {
        // Round-off pushed u past the last candidate; take it.
        for (int j = m.k - 1; j >= 0; --j)
          if (j != state) {
            next_state = j;
            break;
          }
      }
      state = next_state;
      next_jump += rng.exponential(-m(state, state));
    }
    path.states[i] = state;
  }
  return path;
}

/// Maps a state path onto normalized levels: value[n] = state[n]/(k-1).
inline StepwiseTrace levels_from_path(const StatePath& path, int k) {
  if (k < 2) throw ValidationError("state count must be >= 2");
  for (int s : path.states)
    if (s < 0 || s >= k)
      throw ValidationError("state index " + std::to_string(s) +
                            " out of range for k=" + std::to_string(k));
  StepwiseTrace trace;
  trace.k = k;
  trace.path = path;
  trace.values.resize(path.states.size());
  for (std::size_t i = 0; i < path.states.size(); ++i)
    trace.values[i] = level_of_state(path.states[i], k);
  return trace;
}

// ---------------------------------------------------------------------------
// Rate-matrix catalogs
// ---------------------------------------------------------------------------

struct CatalogEntry {
  std::string id;
  RateMatrix matrix;
};

/// Parses a catalog file: JSON array of {id, K, rows: [[...], ...]}.
inline std::vector<CatalogEntry> load_catalog(
    const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  if (!doc.is_array()) throw IoError(path.string() + ": expected JSON array");
  std::vector<CatalogEntry> catalog;
  for (const auto& item : doc) {
    CatalogEntry e;
    e.id = item.at("id").get<std::string>();
    e.matrix.k = item.at("K").get<int>();
    const auto& rows = item.at("rows");
    for (const auto& row : rows)
      for (const auto& v : row) e.matrix.entries.push_back(v.get<double>());
    if (auto err = validate_rate_matrix(e.matrix))
      throw ValidationError(path.string() + ": matrix `" + e.id +
                            "`: " + *err);
    catalog.push_back(std::move(e));
  }
  return catalog;
}

/// Directory holding the shipped catalogs: $SSDM_DATA_DIR if set, otherwise
/// the source-tree data/ directory recorded at build time.
inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SSDM_DATA_DIR")) return env;
#ifdef SSDM_SOURCE_DATA_DIR
  return SSDM_SOURCE_DATA_DIR;
#else
  return "data";
#endif
}

inline std::vector<CatalogEntry> train_catalog() {
  return load_catalog(default_data_dir() / "train_catalog.json");
}

inline std::vector<CatalogEntry> test_catalog() {
  return load_catalog(default_data_dir() / "test_catalog.json");
}

/// Resolves `train`, `test`, or a filesystem path.
inline std::vector<CatalogEntry> resolve_catalog(const std::string& name) {
  if (name == "train") return train_catalog();
  if (name == "test") return test_catalog();
  return load_catalog(name);
}

// ---------------------------------------------------------------------------
// Dataset building
// ---------------------------------------------------------------------------

/// One manifest row: a batch of traces generated from a single rate matrix
/// under one noise condition. `files` are the primary traces (clean for
/// generation output, noisy after corruption); `gt_files` hold the matching
/// clean traces when `files` are noisy. Paths are relative to the manifest.
struct ManifestEntry {
  std::string matrix_id;
  int k = 0;
  std::string noise_kind = "none";  // none | white | pink
  double snr = 0.0;
  std::uint64_t seed = 0;
  int trace_count = 0;
  std::vector<std::string> files;
  std::vector<std::string> gt_files;
};

struct DatasetManifest {
  std::size_t n_samples = 0;
  double dt = 1.0;
  std::vector<ManifestEntry> entries;

  json to_json() const {
    json entries_json = json::array();
    for (const auto& e : entries) {
      json je{{"matrix_id", e.matrix_id}, {"k", e.k},
              {"noise", e.noise_kind},    {"snr", e.snr},
              {"seed", e.seed},           {"trace_count", e.trace_count},
              {"files", e.files}};
      if (!e.gt_files.empty()) je["gt_files"] = e.gt_files;
      entries_json.push_back(std::move(je));
    }
    return json{{"version", 1},
                {"n_samples", n_samples},
                {"dt", dt},
                {"entries", entries_json}};
  }

  static DatasetManifest from_json(const json& j) {
    DatasetManifest m;
    m.n_samples = j.at("n_samples").get<std::size_t>();
    m.dt = j.at("dt").get<double>();
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.matrix_id = je.at("matrix_id").get<std::string>();
      e.k = je.at("k").get<int>();
      e.noise_kind = je.at("noise").get<std::string>();
      e.snr = je.at("snr").get<double>();
      e.seed = je.at("seed").get<std::uint64_t>();
      e.trace_count = je.at("trace_count").get<int>();
      e.files = je.at("files").get<std::vector<std::string>>();
      if (je.contains("gt_files"))
        e.gt_files = je.at("gt_files").get<std::vector<std::string>>();
      m.entries.push_back(std::move(e));
    }
    return m;
  }
};

inline void write_manifest(const std::filesystem::path& path,
                           const DatasetManifest& m) {
  write_json_file(path, m.to_json());
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  return DatasetManifest::from_json(read_json_file(path));
}

/// Checks that every file reference resolves and that per-entry seeds are
/// unique. Throws ValidationError otherwise.
inline void validate_manifest(const DatasetManifest& m,
                              const std::filesystem::path& base_dir) {
  std::vector<std::uint64_t> seeds;
  for (const auto& e : m.entries) {
    if (e.files.size() != static_cast<std::size_t>(e.trace_count))
      throw ValidationError("manifest entry " + e.matrix_id +
                            ": file count != trace_count");
    if (!e.gt_files.empty() && e.gt_files.size() != e.files.size())
      throw ValidationError("manifest entry " + e.matrix_id +
                            ": gt_files count mismatch");
    for (const auto& f : e.files)
      if (!std::filesystem::exists(base_dir / f))
        throw ValidationError("missing trace file: " + (base_dir / f).string());
    for (const auto& f : e.gt_files)
      if (!std::filesystem::exists(base_dir / f))
        throw ValidationError("missing gt file: " + (base_dir / f).string());
    seeds.push_back(e.seed);
  }
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end())
    throw ValidationError("manifest seeds are not unique across entries");
}

/// Generates `traces_per_matrix` clean traces for every catalog entry and
/// writes them under out_dir/traces/, plus a manifest.json. Trace i of
/// catalog entry c uses seed derive_seed(seed, c, i), so any subset can be
/// regenerated independently.
inline DatasetManifest build_dataset(const std::vector<CatalogEntry>& catalog,
                                     int traces_per_matrix,
                                     std::size_t n_samples, double dt,
                                     std::uint64_t seed,
                                     const std::filesystem::path& out_dir) {
  if (traces_per_matrix < 0)
    throw ValidationError("traces_per_matrix must be >= 0");
  for (const auto& e : catalog) require_valid(e.matrix);

  DatasetManifest manifest;
  manifest.n_samples = n_samples;
  manifest.dt = dt;
  if (traces_per_matrix == 0) return manifest;

  std::filesystem::create_directories(out_dir / "traces");
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    const auto& entry = catalog[c];
    ManifestEntry me;
    me.matrix_id = entry.id;
    me.k = entry.matrix.k;
    me.seed = derive_seed(seed, c);
    me.trace_count = traces_per_matrix;
    for (int i = 0; i < traces_per_matrix; ++i) {
      const std::uint64_t trace_seed = derive_seed(seed, c, i + 1);
      const StatePath path = simulate_ctmc(entry.matrix, n_samples, dt,
                                           trace_seed);
      const StepwiseTrace trace = levels_from_path(path, entry.matrix.k);
      char name[128];
      std::snprintf(name, sizeof(name), "traces/%s_%04d.csv",
                    entry.id.c_str(), i);
      write_trace_csv(out_dir / name, trace.values);
      me.files.emplace_back(name);
    }
    manifest.entries.push_back(std::move(me));
  }
  write_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace ssdm
