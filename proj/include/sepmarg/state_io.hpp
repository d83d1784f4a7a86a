#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "sepmarg/tensor_core.hpp"

// State files are JSON documents:
//
//   {
//     "format": "sepmarg-state/1",
//     "dims": [2, 2, 2, 2],
//     "kind": "pure",                      // or "mixed"
//     "amplitudes": [[re, im], ...],       // pure; party 0 most significant
//     "rational": ["-2/33+5i/38", ...],    // pure; exact alternative to amplitudes
//     "matrix": [[re, im], ...]            // mixed; row-major, dim*dim entries
//   }
//
// Pure amplitudes need not be normalized; they are normalized on load.
// When both "amplitudes" and "rational" are present, "rational" wins.
namespace sepmarg {

class FormatError : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

// Parses an exact complex rational such as "-3/35-i/22", "11/31", "5i/38" or "0".
Complex parse_complex_rational(std::string_view text);

QuantumState state_from_json(const nlohmann::json& doc);
nlohmann::json state_to_json(const QuantumState& state);

QuantumState load_state(const std::filesystem::path& path);
void save_state(const QuantumState& state, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace sepmarg
