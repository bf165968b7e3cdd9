#include "bfisense/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bfisense::io {

namespace {

template <typename T>
T get_field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw InvalidInput(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace

json complex_matrix_to_json(const ComplexMatrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix complex_matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        throw InvalidInput("matrix: expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw InvalidInput("matrix: row " + std::to_string(i) + " has the wrong length");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& z = row[static_cast<std::size_t>(c)];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw InvalidInput("matrix: entries must be [re, im] number pairs");
            m(i, c) = {z[0].get<double>(), z[1].get<double>()};
        }
    }
    return m;
}

json csi_to_json(const CsiRecord& rec)
{
    return {
        {"geometry",
         {{"n_rx", rec.geometry.n_rx},
          {"n_tx", rec.geometry.n_tx},
          {"rx_spacing", rec.geometry.rx_spacing},
          {"tx_spacing", rec.geometry.tx_spacing}}},
        {"grid",
         {{"center_frequency", rec.grid.center_frequency},
          {"spacing", rec.grid.spacing},
          {"n_subcarriers", rec.grid.n_subcarriers}}},
        {"k", rec.k},
        {"matrix", complex_matrix_to_json(rec.matrix)},
    };
}

CsiRecord csi_from_json(const json& j)
{
    CsiRecord rec;
    const json g = get_field<json>(j, "geometry");
    rec.geometry.n_rx = get_field<int>(g, "n_rx");
    rec.geometry.n_tx = get_field<int>(g, "n_tx");
    rec.geometry.rx_spacing = get_field<double>(g, "rx_spacing");
    rec.geometry.tx_spacing = get_field<double>(g, "tx_spacing");
    rec.geometry.validate();
    const json grid = get_field<json>(j, "grid");
    rec.grid.center_frequency = get_field<double>(grid, "center_frequency");
    rec.grid.spacing = get_field<double>(grid, "spacing");
    rec.grid.n_subcarriers = get_field<int>(grid, "n_subcarriers");
    rec.grid.validate();
    rec.k = get_field<int>(j, "k");
    if (rec.k < 1 || rec.k > rec.grid.n_subcarriers)
        throw InvalidInput("csi record: k outside [1, n_subcarriers]");
    rec.matrix = complex_matrix_from_json(get_field<json>(j, "matrix"));
    if (rec.matrix.rows() != rec.geometry.n_rx || rec.matrix.cols() != rec.geometry.n_tx)
        throw InvalidInput("csi record: matrix shape does not match the geometry");
    return rec;
}

json bfi_to_json(const Bfi& theta)
{
    json elements = json::array();
    for (const auto& e : theta.elements)
        elements.push_back({{"kind", to_string(e.label.kind)}, {"row", e.label.row}, {"col", e.label.col}, {"value", e.value}});
    return {{"m_tx", theta.m_tx}, {"n_rx", theta.n_rx}, {"elements", elements}, {"degenerate", theta.degenerate}};
}

Bfi bfi_from_json(const json& j)
{
    const int m_tx = get_field<int>(j, "m_tx");
    const int n_rx = get_field<int>(j, "n_rx");
    const json elements = get_field<json>(j, "elements");
    if (!elements.is_array())
        throw InvalidInput("bfi record: elements must be an array");
    const std::vector<BfiElementLabel> labels = bfi_labels(n_rx, m_tx);
    if (elements.size() != labels.size())
        throw InvalidInput("bfi record: expected " + std::to_string(labels.size()) + " elements, got " +
                           std::to_string(elements.size()));
    std::vector<double> values;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const json& e = elements[i];
        const BfiElementLabel got{angle_kind_from_string(get_field<std::string>(e, "kind")), get_field<int>(e, "row"),
                                  get_field<int>(e, "col")};
        if (!(got == labels[i]))
            throw InvalidInput("bfi record: element " + std::to_string(i) + " is " + to_string(got) + ", expected " +
                               to_string(labels[i]));
        values.push_back(get_field<double>(e, "value"));
    }
    Bfi theta = make_bfi(n_rx, m_tx, values);
    if (j.contains("degenerate") && j["degenerate"].is_boolean())
        theta.degenerate = j["degenerate"].get<bool>();
    return theta;
}

json quantized_to_json(const QuantizedBfi& q)
{
    const Bfi deq = dequantize(q);
    json elements = json::array();
    for (std::size_t i = 0; i < deq.elements.size(); ++i) {
        const auto& e = deq.elements[i];
        elements.push_back({{"kind", to_string(e.label.kind)},
                            {"row", e.label.row},
                            {"col", e.label.col},
                            {"code", q.codes[i]},
                            {"value", e.value}});
    }
    return {{"m_tx", q.m_tx}, {"n_rx", q.n_rx}, {"b_psi", q.b_psi}, {"b_phi", q.b_phi}, {"elements", elements}};
}

json selection_to_json(const SelectionResult& sel)
{
    json per = json::array(), order = json::array(), coverage = json::array(), eta = json::array();
    for (const auto& sc : sel.per_subcarrier) {
        std::vector<int> picked = sc.selected;
        json pick_order = json::array();
        for (int e : picked)
            pick_order.push_back(e + 1);
        std::sort(picked.begin(), picked.end());
        json sorted = json::array();
        for (int e : picked)
            sorted.push_back(e + 1);
        per.push_back(sorted);
        order.push_back(pick_order);
        coverage.push_back(sc.coverage);
        json ej = json::array();
        for (int e : sc.eta)
            ej.push_back(e + 1);
        eta.push_back(ej);
    }
    return {{"mode", to_string(sel.mode)}, {"n_sel", sel.n_sel},  {"n_bfi", sel.n_bfi},  {"per_subcarrier", per},
            {"pick_order", order},         {"coverage", coverage}, {"eta", eta}};
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string dataset_csv(const Dataset& data, int n_rx, int m_tx)
{
    const std::vector<BfiElementLabel> labels = bfi_labels(n_rx, m_tx);
    std::ostringstream out;
    for (const auto& tag : data.feature_map) {
        out << 'k' << tag.k << '_' << to_string(labels.at(static_cast<std::size_t>(tag.element)));
        const bool sincos = std::count_if(data.feature_map.begin(), data.feature_map.end(), [&](const FeatureTag& t) {
                                return t.k == tag.k && t.element == tag.element;
                            }) == 2;
        if (sincos)
            out << (tag.component == 0 ? "_sin" : "_cos");
        out << ',';
    }
    out << "position,x,y\n";
    for (Eigen::Index r = 0; r < data.n_samples(); ++r) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c)
            out << format_double(data.features(r, c)) << ',';
        out << data.position_index[static_cast<std::size_t>(r)] << ',' << format_double(data.positions(r, 0)) << ','
            << format_double(data.positions(r, 1)) << '\n';
    }
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace bfisense::io
