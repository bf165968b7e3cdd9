#pragma once

// JSON and CSV artifact formats. Element indices in files are 1-based.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bfisense/eval.hpp"

namespace bfisense::io {

using json = nlohmann::json;

struct CsiRecord {
    ArrayGeometry geometry;
    SubcarrierGrid grid;
    int k = 1;
    ComplexMatrix matrix; // n_rx x n_tx
};

json complex_matrix_to_json(const ComplexMatrix& m); // [[[re, im], ...], ...] row-major
ComplexMatrix complex_matrix_from_json(const json& j);

json csi_to_json(const CsiRecord& rec);
CsiRecord csi_from_json(const json& j);

json bfi_to_json(const Bfi& theta);
Bfi bfi_from_json(const json& j);

json quantized_to_json(const QuantizedBfi& q);

json selection_to_json(const SelectionResult& sel);

/// Shortest text that reads back to the same double; "inf", "-inf", "nan".
std::string format_double(double v);

/// Header: one "k<k>_<label>[_sin|_cos]" column per feature, then x, y.
std::string dataset_csv(const Dataset& data, int n_rx, int m_tx);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

} // namespace bfisense::io
