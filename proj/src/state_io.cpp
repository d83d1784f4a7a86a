#include "sepmarg/state_io.hpp"

#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sepmarg {
namespace {

struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction& operator+=(const Fraction& o) {
        const std::int64_t g = std::gcd(den, o.den);
        num = num * (o.den / g) + o.num * (den / g);
        den = den / g * o.den;
        const std::int64_t r = std::gcd(num < 0 ? -num : num, den);
        if (r > 1) {
            num /= r;
            den /= r;
        }
        return *this;
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

std::int64_t read_integer(std::string_view s, std::size_t& pos) {
    const std::size_t start = pos;
    std::int64_t v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        if (v > (std::int64_t{1} << 40)) throw FormatError("rational literal too large");
        ++pos;
    }
    if (pos == start) throw FormatError("expected digits");
    return v;
}

std::string pair_path(const char* field, std::size_t i) {
    return std::string(field) + "[" + std::to_string(i) + "]";
}

Complex read_pair(const nlohmann::json& v, const char* field, std::size_t i) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw FormatError("state file: " + pair_path(field, i) + " must be a [re, im] pair of numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

Complex parse_complex_rational(std::string_view text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw FormatError("empty rational literal");

    Fraction re, im;
    std::size_t pos = 0;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        } else if (pos != 0) {
            throw FormatError("rational literal '" + std::string(text) + "': expected sign between terms");
        }
        if (pos >= s.size()) throw FormatError("rational literal '" + std::string(text) + "': dangling sign");

        std::int64_t num = 1;
        bool imaginary = false;
        bool have_num = false;
        if (std::isdigit(static_cast<unsigned char>(s[pos]))) {
            num = read_integer(s, pos);
            have_num = true;
        }
        if (pos < s.size() && s[pos] == 'i') {
            imaginary = true;
            ++pos;
        }
        if (!have_num && !imaginary)
            throw FormatError("rational literal '" + std::string(text) + "': malformed term");
        std::int64_t den = 1;
        if (pos < s.size() && s[pos] == '/') {
            ++pos;
            den = read_integer(s, pos);
            if (den == 0) throw FormatError("rational literal '" + std::string(text) + "': zero denominator");
        }
        Fraction term{sign * num, den};
        (imaginary ? im : re) += term;
    }
    return {re.value(), im.value()};
}

QuantumState state_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw FormatError("state file: top level must be an object");
    if (doc.contains("format") && doc["format"] != "sepmarg-state/1")
        throw FormatError("state file: unsupported format " + doc["format"].dump());
    if (!doc.contains("dims") || !doc["dims"].is_array()) throw FormatError("state file: missing field 'dims'");
    std::vector<int> dims;
    for (std::size_t i = 0; i < doc["dims"].size(); ++i) {
        const auto& d = doc["dims"][i];
        if (!d.is_number_integer()) throw FormatError("state file: " + pair_path("dims", i) + " must be an integer");
        dims.push_back(d.get<int>());
    }
    PartyLayout layout(dims);
    const std::string kind = doc.value("kind", "");
    const auto dim = static_cast<std::size_t>(layout.total_dim());

    if (kind == "pure") {
        CVector amp(dim);
        if (doc.contains("rational")) {
            const auto& r = doc["rational"];
            if (!r.is_array() || r.size() != dim)
                throw FormatError("state file: 'rational' must list " + std::to_string(dim) + " entries");
            for (std::size_t i = 0; i < dim; ++i) {
                if (!r[i].is_string()) throw FormatError("state file: " + pair_path("rational", i) + " must be a string");
                try {
                    amp(i) = parse_complex_rational(r[i].get<std::string>());
                } catch (const FormatError& e) {
                    throw FormatError("state file: " + pair_path("rational", i) + ": " + e.what());
                }
            }
        } else if (doc.contains("amplitudes")) {
            const auto& a = doc["amplitudes"];
            if (!a.is_array() || a.size() != dim)
                throw FormatError("state file: 'amplitudes' must list " + std::to_string(dim) + " entries");
            for (std::size_t i = 0; i < dim; ++i) amp(i) = read_pair(a[i], "amplitudes", i);
        } else {
            throw FormatError("state file: pure state needs 'amplitudes' or 'rational'");
        }
        return QuantumState::pure(layout, std::move(amp));
    }
    if (kind == "mixed") {
        const auto& m = doc.value("matrix", nlohmann::json());
        if (!m.is_array() || m.size() != dim * dim)
            throw FormatError("state file: 'matrix' must list " + std::to_string(dim * dim) + " entries");
        CMatrix rho(dim, dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) rho(r, c) = read_pair(m[r * dim + c], "matrix", r * dim + c);
        return QuantumState::mixed(layout, std::move(rho));
    }
    throw FormatError("state file: field 'kind' must be \"pure\" or \"mixed\"");
}

nlohmann::json state_to_json(const QuantumState& state) {
    nlohmann::json doc;
    doc["format"] = "sepmarg-state/1";
    doc["dims"] = state.layout().dims();
    auto pair = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
    if (state.is_pure()) {
        doc["kind"] = "pure";
        auto arr = nlohmann::json::array();
        for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) arr.push_back(pair(state.amplitudes()(i)));
        doc["amplitudes"] = std::move(arr);
    } else {
        doc["kind"] = "mixed";
        const CMatrix rho = state.density_matrix();
        auto arr = nlohmann::json::array();
        for (Eigen::Index r = 0; r < rho.rows(); ++r)
            for (Eigen::Index c = 0; c < rho.cols(); ++c) arr.push_back(pair(rho(r, c)));
        doc["matrix"] = std::move(arr);
    }
    return doc;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

QuantumState load_state(const std::filesystem::path& path) {
    try {
        return state_from_json(read_json_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_state(const QuantumState& state, const std::filesystem::path& path) {
    write_json_file(state_to_json(state), path);
}

}  // namespace sepmarg
