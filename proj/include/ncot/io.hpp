#pragma once

// Problem files and emitted records.
//
// Matrix literal: an array of rows, each entry a two-element array [re, im].
// Densities may also be written {"diag": [..]}; every density is normalized
// on load (unit trace, or unit product trace for a bundle).
//
// Algebra problem:
//   {"kind": "algebra", "derivation": {"generators": [matrix, ...]},
//    "p": density, "q": density, "solver": {...}, "heat": {"times": [..]},
//    "curvature": {"samples": int}}
// Bundle problem:
//   {"kind": "bundle", "base": {"weights": [..], "labels": [..]},
//    "fibers": [{"generators": [...]}, ...], "P": [matrix, ...], "Q": [matrix, ...],
//    "solver": {...}, "curvature": {"samples": int}}
//
// Errors carry the JSON field path, e.g. "$.fibers[1].generators".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncot/bundle.hpp"
#include "ncot/entropy.hpp"
#include "ncot/transport.hpp"

namespace ncot::io {

using json = nlohmann::ordered_json;

CMatrix parse_matrix(const json& j, const std::string& path);
HermitianMatrix parse_hermitian(const json& j, const std::string& path);
// Accepts a matrix literal or {"diag": [..]}; the result is scaled to unit trace.
DensityMatrix parse_density(const json& j, const std::string& path);
Derivation parse_derivation(const json& j, std::size_t n, const std::string& path);
// Fields that are present override `defaults`.
SolverConfig parse_solver(const json& j, const SolverConfig& defaults, const std::string& path);

json to_json(const CMatrix& m);
json to_json(const SolverConfig& c);

struct AlgebraProblem {
  Derivation derivation;
  std::optional<DensityMatrix> p;
  std::optional<DensityMatrix> q;
  std::vector<double> heat_times;
};

struct BundleProblem {
  VerticalGradient vg;
  std::optional<FiberedDensity> p;
  std::optional<FiberedDensity> q;
};

struct Problem {
  std::string kind;
  std::optional<AlgebraProblem> algebra;
  std::optional<BundleProblem> bundle;
  SolverConfig solver;
  std::optional<int> samples;
};

Problem parse_problem(const json& j);
// Reads and parses a file; syntax errors report line and column.
Problem load_problem(const std::string& file);
json parse_text(const std::string& text, const std::string& source);

// Records. Non-finite numbers are written as null and flagged with
// "infinite": true on the enclosing record.
json transport_record(const TransportResult& r, bool with_path);
json curvature_record(const CurvatureReport& r);
json disintegration_record(const DisintegrationResult& r, bool with_paths);
json mean_curvature_record(const MeanCurvatureReport& r);

TransportResult parse_transport_record(const json& j);
CurvatureReport parse_curvature_record(const json& j);
DisintegrationResult parse_disintegration_record(const json& j);
MeanCurvatureReport parse_mean_curvature_record(const json& j);

// Serializes with every double printed as %.17g; non-finite doubles become null.
std::string dump(const json& j, int indent = 2);

}  // namespace ncot::io
