#pragma once

// JSON and CSV encodings for the library's value types.
//
// Matrices and vectors use {"dim": n, "re": [...], "im": [...]} with row-major
// real and imaginary parts; doubles are written in shortest round-trip form so
// decoding reproduces every bit. Decoders are strict: unknown keys raise
// ConfigError naming the offending key path.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcsft/detect.hpp"
#include "pcsft/field_spec.hpp"
#include "pcsft/fieldsim.hpp"
#include "pcsft/linops.hpp"
#include "pcsft/onticmap.hpp"
#include "pcsft/superpos.hpp"

namespace pcsft {

using Json = nlohmann::ordered_json;

/// Raises ConfigError listing every key of `obj` not in `allowed` (prefixed by `path`).
void require_known_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& path);

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path = "matrix");
Json to_json(const HermitianOperator& op);
HermitianOperator hermitian_from_json(const Json& j, const std::string& path = "matrix");

Json vector_to_json(const CVector& v);
CVector vector_from_json(const Json& j, const std::string& path = "vector");

Json to_json(const FieldSpec& spec);
FieldSpec field_spec_from_json(const Json& j, const std::string& path = "field");

Json to_json(const EnsembleStats& stats);
Json to_json(const EpistemicImage& image);
EpistemicImage epistemic_from_json(const Json& j, const std::string& path = "image");
Json to_json(const CorrelationMatrix& cor);
Json to_json(const DetectionStats& stats);

/// 64-bit FNV-1a of the bytes of s.
std::uint64_t fnv1a64(const std::string& s);
/// 16 hex digits of fnv1a64 over the compact JSON encoding of spec.
std::string spec_digest(const FieldSpec& spec);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

// --- CSV ------------------------------------------------------------------
//
// Ensemble files:
//   dim,n,seed,spec_digest
//   <dim>,<n>,<seed>,<digest or "none">
//   [basis                     (component files only)
//    dim rows: re_0,im_0,...   (row r holds entry r of every basis vector)]
//   samples
//   n rows: re_0,im_0,re_1,im_1,...

struct EnsembleFile {
  int dim = 0;
  std::uint64_t seed = 0;
  std::string spec_digest;
  std::optional<CMatrix> basis;
  CMatrix samples;  // dim x n
};

void write_ensemble_csv(std::ostream& os, const FieldEnsemble& ensemble);
void write_components_csv(std::ostream& os, const ComponentSignals& signals, std::uint64_t seed,
                          const std::string& digest);
/// Throws InvalidInput on malformed input.
EnsembleFile read_ensemble_csv(std::istream& is);

/// "channel,probability" rows.
void write_probabilities_csv(std::ostream& os, const std::vector<double>& p);

/// threshold,freq_1..freq_k,coincidence,g2,noclick. g2 is for channels (1,2)
/// and left empty when undefined.
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& sweep);

}  // namespace pcsft
