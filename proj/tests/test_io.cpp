#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "shadowlab/crooked.hpp"
#include "shadowlab/maps.hpp"
#include "shadowlab/saddle.hpp"
#include "shadowlab/shadow.hpp"

using namespace shadowlab;

namespace {

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string& header) {
    std::istringstream in(text);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<double> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("Hoelder CSV round trip") {
        const HolderFit fit = holder_exponent(linear_expanding_map(2), {1e-3, 1e-4}, 5, 100, 3);
        std::string header;
        const auto rows = parse_csv(holder_csv(fit), header);
        CHECK(header == "delta,epsilon_min,flagged");
        REQUIRE(rows.size() == fit.rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i][0] == fit.rows[i].delta);
            CHECK(rows[i][1] == fit.rows[i].epsilon_min);
            CHECK((rows[i][2] != 0.0) == fit.rows[i].flagged);
        }
        CHECK(holder_csv(fit) == holder_csv(holder_exponent(linear_expanding_map(2), {1e-3, 1e-4}, 5, 100, 3)));
    }

    TEST_CASE("shadow construction CSV round trip") {
        const FiniteCoverMap h = finite_cover_map(build_crooked_model(0.15, 6.0), 5, 1);
        const double alpha = AlphaSpec::factorial_series(10, 3, BigRational(1, 5)).value();
        const PseudoOrbit p = generate_pseudo_orbit(rotation_map(alpha), {0.2, 0.0}, h.delta_bound(), 100, 4);
        const ShadowConstruction s = shadow_first_coordinate(h, p, 100);
        std::string header;
        const auto rows = parse_csv(shadow_construction_csv(s), header);
        CHECK(header == "n,x_n,orbit_first_coord,deviation");
        REQUIRE(rows.size() == s.orbit_x.size());
        for (std::size_t n = 0; n < rows.size(); ++n) {
            CHECK(rows[n][1] == s.pseudo_x[n]);
            CHECK(rows[n][2] == s.orbit_x[n]);
            CHECK(rows[n][3] == s.deviation[n]);
        }
    }

    TEST_CASE("sink certificate JSON round trip") {
        const SaddleLoopModel m = build_saddle_model();
        const SinkCertificate c = detect_sink(m, 14, 16, 2.5, 256);
        const auto j = nlohmann::json::parse(sink_certificate_json(c));
        for (const char* key : {"n", "t", "period", "norm_bound", "samples"}) CHECK(j.contains(key));
        CHECK(j["n"].get<int>() == c.n);
        CHECK(j["t"].get<double>() == c.t);
        CHECK(j["period"].get<int>() == c.period);
        CHECK(j["samples"].get<int>() == 256);
        CHECK(j["norm_bound"].get<double>() == c.primary.max_norm);
        CHECK(j["scan"].size() == c.scan.size());
    }
}
