#include <filesystem>

#include "doctest.h"
#include "sepmarg/state_io.hpp"

using namespace sepmarg;

TEST_CASE("complex rationals") {
    CHECK(parse_complex_rational("0") == Complex(0, 0));
    CHECK(parse_complex_rational("11/31") == Complex(11.0 / 31, 0));
    CHECK(parse_complex_rational("5i/38") == Complex(0, 5.0 / 38));
    CHECK(parse_complex_rational("-3/35-i/22") == Complex(-3.0 / 35, -1.0 / 22));
    CHECK(parse_complex_rational("-2/33+5i/38") == Complex(-2.0 / 33, 5.0 / 38));
    CHECK(parse_complex_rational("i") == Complex(0, 1));
    CHECK(parse_complex_rational("-i/111") == Complex(0, -1.0 / 111));
    CHECK_THROWS_AS(parse_complex_rational(""), FormatError);
    CHECK_THROWS_AS(parse_complex_rational("1/0"), FormatError);
    CHECK_THROWS_AS(parse_complex_rational("abc"), FormatError);
    CHECK_THROWS_AS(parse_complex_rational("1/2+"), FormatError);
}

TEST_CASE("pure state round trip through a file") {
    const auto s = random_pure_state(PartyLayout({2, 3}), 4);
    const auto path = std::filesystem::temp_directory_path() / "sepmarg_io_roundtrip.json";
    save_state(s, path);
    const auto back = load_state(path);
    std::filesystem::remove(path);
    CHECK(back.layout() == s.layout());
    CHECK((back.amplitudes() - s.amplitudes()).norm() < 1e-15);
}

TEST_CASE("mixed state round trip") {
    CMatrix rho = CMatrix::Identity(4, 4) / 4.0;
    rho(0, 3) = Complex(0.1, 0.05);
    rho(3, 0) = std::conj(rho(0, 3));
    const auto s = QuantumState::mixed(PartyLayout::qubits(2), rho);
    const auto back = state_from_json(state_to_json(s));
    CHECK(!back.is_pure());
    CHECK((back.density_matrix() - rho).norm() < 1e-15);
}

TEST_CASE("rational entries win and are normalized") {
    nlohmann::json doc = {{"format", "sepmarg-state/1"},
                          {"dims", {2}},
                          {"kind", "pure"},
                          {"amplitudes", {{1, 0}, {0, 0}}},
                          {"rational", {"3/5", "4i/5"}}};
    const auto s = state_from_json(doc);
    CHECK(s.amplitudes()(0) == Complex(0.6, 0));
    CHECK(s.amplitudes()(1).imag() == doctest::Approx(0.8));
    doc["rational"] = {"3", "4i"};
    CHECK(state_from_json(doc).amplitudes().norm() == doctest::Approx(1.0));
}

TEST_CASE("malformed documents") {
    nlohmann::json base = {{"format", "sepmarg-state/1"}, {"dims", {2, 2}}, {"kind", "pure"},
                           {"amplitudes", {{1, 0}, {0, 0}, {0, 0}, {0, 0}}}};
    CHECK_NOTHROW(state_from_json(base));
    auto d = base;
    d["format"] = "other/1";
    CHECK_THROWS_AS(state_from_json(d), FormatError);
    d = base;
    d["amplitudes"] = {{1, 0}, {0, 0}};
    CHECK_THROWS_AS(state_from_json(d), FormatError);
    d = base;
    d["kind"] = "weird";
    CHECK_THROWS_AS(state_from_json(d), FormatError);
    d = base;
    d.erase("dims");
    CHECK_THROWS_AS(state_from_json(d), FormatError);
    CHECK_THROWS(load_state("/nonexistent/sepmarg.json"));
}

TEST_CASE("bundled fixtures load") {
    for (const char* name : {"psi4b.state.json", "psi5a.state.json", "psi6a.state.json"}) {
        const auto s = load_state(std::filesystem::path(SEPMARG_FIXTURE_DIR) / name);
        CHECK(s.is_pure());
        CHECK(s.amplitudes().norm() == doctest::Approx(1.0));
    }
}
