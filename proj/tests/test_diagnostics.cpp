#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "esnet/diagnostics.hpp"
#include "helpers.hpp"

using namespace esnet;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Field random_field(const Grid& g, std::uint64_t seed, double amp = 0.8) {
  Field f = g.dims == 1 ? testutil::Trig1D::random(seed, 6).sample(g)
                        : testutil::Trig2D::random(seed, 3).sample(g);
  double m = linf_norm(f);
  for (auto& v : f.values) v *= amp / std::max(1.0, m);
  return f;
}

void set_all(EStableNet& net, double wval, double bval) {
  for (auto* p : net.parameters()) {
    double v = p->name.back() == 'w' ? wval : bval;
    std::fill(p->value.begin(), p->value.end(), v);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("energy trace bookkeeping on closed-form networks", "[diagnostics]") {
  Grid g(1, 32);

  SECTION("all-zero estable blocks: one U drop, then flat") {
    EStableNet net = make_net(NetKind::estable_g, 1, 3, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    set_all(net, 0.0, 0.0);  // g == 0: phi frozen, U jumps to zero at block 1
    Field f = random_field(g, 11);
    ForwardResult r = forward(net, pack_field(f), nullptr);
    EnergyTrace tr = energy_trace(net, r, 0);

    REQUIRE(tr.modified.size() == 4);
    REQUIRE(tr.phi_increment_sq.size() == 3);
    Field u0 = aux_u_init(f, net.epsilon, net.C);
    CHECK(tr.modified[0] == discrete_energy(f, u0, net.C));
    double unorm = inner_product(u0, u0);
    for (int n = 0; n < 4; ++n) CHECK(tr.original[n] == original_energy(f, net.epsilon));
    for (int n = 0; n < 3; ++n) CHECK(tr.phi_increment_sq[n] == 0.0);
    CHECK(tr.u_increment_sq[0] == unorm);
    CHECK(tr.u_increment_sq[1] == 0.0);
    CHECK(tr.u_increment_sq[2] == 0.0);
    // the sole energy drop is exactly the U-increment term of the identity
    CHECK(std::abs(tr.modified[1] - tr.modified[0] + unorm) <= 1e-13);
    CHECK(std::abs(tr.identity_residual[0]) <= 1e-12);
    CHECK(tr.identity_residual[1] == 0.0);  // nothing moves after block 1
    CHECK(tr.identity_residual[2] == 0.0);
    CHECK(tr.modified[2] == tr.modified[1]);
    CHECK(tr.modified[3] == tr.modified[1]);
  }
  SECTION("all-zero aux-tilde blocks on the zero field: everything is 1/4 + Ctilde") {
    // H == 0 freezes the state; phi == 0 gives Utilde == sqrt(1/4 + Ctilde)
    EStableNet net = make_net(NetKind::aux_tilde, 1, 3, 5, {1, 4, 1}, 0.1, 0.0, 0.05);
    set_all(net, 0.0, 0.0);
    Field zero(g);
    ForwardResult r = forward(net, pack_field(zero), nullptr);
    EnergyTrace tr = energy_trace(net, r, 0);
    for (int n = 0; n <= 3; ++n) {
      CHECK(tr.modified[n] == 0.5);  // <U,U> = (1/2)^2 * |Omega| = 0.5, exact in binary
      CHECK(tr.original[n] == 0.5);  // F(0)*|Omega|
    }
    for (int n = 0; n < 3; ++n) {
      CHECK(tr.phi_increment_sq[n] == 0.0);
      CHECK(tr.u_increment_sq[n] == 0.0);
      CHECK(tr.identity_residual[n] == 0.0);  // estable-only column stays zero
    }
  }
  SECTION("batch items are traced independently") {
    EStableNet net = make_net(NetKind::estable_g, 1, 2, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 12);
    Field f0 = random_field(g, 13), f1 = random_field(g, 14), f2 = random_field(g, 15);
    ForwardResult r = forward(net, pack_fields({&f0, &f1, &f2}), nullptr);
    const Field* fs[] = {&f0, &f1, &f2};
    for (int item = 0; item < 3; ++item) {
      EnergyTrace tr = energy_trace(net, r, item);
      const Field& f = *fs[item];
      CHECK(tr.modified[0] == discrete_energy(f, aux_u_init(f, net.epsilon, net.C), net.C));
      CHECK(tr.original[0] == original_energy(f, net.epsilon));
    }
  }
}

TEST_CASE("random networks satisfy the per-block decay identity", "[diagnostics]") {
  SECTION("1D estable, several seeds and amplitudes") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
      EStableNet net = make_net(NetKind::estable_g, 1, 4, 5, {1, 6, 1}, 0.1, 0.25, 0.05);
      init_params(net, InitScheme::kaiming_uniform, seed);
      Grid g(1, 32);
      std::vector<Field> inputs;
      for (int i = 0; i < 5; ++i)
        inputs.push_back(random_field(g, 100 * seed + std::uint64_t(i), i == 0 ? 2.0 : 0.8));
      DecayReport rep = verify_decay(net, inputs);
      INFO("seed " << seed);
      CHECK(rep.pass);
      CHECK(rep.violations.empty());
      CHECK(rep.samples == 5);
      CHECK(rep.blocks == 4);
      CHECK(rep.max_identity_residual <= 1e-10);
      CHECK(rep.max_modified_increase <= 1e-10);
      REQUIRE(rep.traces.size() == 5);
      for (const auto& tr : rep.traces) {
        REQUIRE(tr.modified.size() == 5);
        for (int n = 0; n < 4; ++n) CHECK(tr.modified[n + 1] <= tr.modified[n] + 1e-10);
      }
    }
  }
  SECTION("1D aux-tilde: monotone new energy, residual column unused") {
    EStableNet net = make_net(NetKind::aux_tilde, 1, 4, 5, {1, 6, 1}, 0.1, 0.3, 0.05);
    init_params(net, InitScheme::xavier_uniform, 24);
    Grid g(1, 32);
    std::vector<Field> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(random_field(g, 300 + std::uint64_t(i)));
    DecayReport rep = verify_decay(net, inputs);
    CHECK(rep.pass);
    CHECK(rep.max_identity_residual == 0.0);
    for (const auto& tr : rep.traces)
      for (std::size_t n = 0; n + 1 < tr.modified.size(); ++n)
        CHECK(tr.modified[n + 1] <= tr.modified[n]);
  }
  SECTION("2D estable") {
    EStableNet net = make_net(NetKind::estable_g, 2, 2, 3, {1, 4, 1}, 0.2, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 25);
    Grid g(2, 24);
    std::vector<Field> inputs = {random_field(g, 26), random_field(g, 27)};
    DecayReport rep = verify_decay(net, inputs);
    CHECK(rep.pass);
    CHECK(rep.max_identity_residual <= 1e-10);
  }
  SECTION("worker pool reproduces the serial report bitwise") {
    EStableNet net = make_net(NetKind::estable_g, 1, 3, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 28);
    Grid g(1, 32);
    std::vector<Field> inputs;
    for (int i = 0; i < 6; ++i) inputs.push_back(random_field(g, 400 + std::uint64_t(i)));
    DecayReport serial = verify_decay(net, inputs);
    WorkerPool pool(3);
    DecayReport pooled = verify_decay(net, inputs, 1e-10, &pool);
    CHECK(serial.pass == pooled.pass);
    CHECK(serial.max_identity_residual == pooled.max_identity_residual);
    CHECK(serial.max_modified_increase == pooled.max_modified_increase);
    REQUIRE(serial.traces.size() == pooled.traces.size());
    for (std::size_t i = 0; i < serial.traces.size(); ++i) {
      CHECK(serial.traces[i].modified == pooled.traces[i].modified);
      CHECK(serial.traces[i].identity_residual == pooled.traces[i].identity_residual);
    }
  }
  SECTION("an impossible tolerance trips the violation reporting") {
    EStableNet net = make_net(NetKind::estable_g, 1, 3, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 29);
    Grid g(1, 32);
    std::vector<Field> inputs = {random_field(g, 30), random_field(g, 31)};
    DecayReport rep = verify_decay(net, inputs, -1.0);  // every finite jump now "fails"
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.violations.size() == 6);  // 2 samples x 3 blocks
    CHECK(rep.violations[0].find("sample 0 block 1") != std::string::npos);
    CHECK(rep.violations[0].find("dE=") != std::string::npos);
  }
  SECTION("plain networks and empty input sets are rejected") {
    EStableNet plain = make_net(NetKind::plain, 1, 2, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(plain, InitScheme::xavier_uniform, 32);
    Grid g(1, 32);
    std::vector<Field> inputs = {random_field(g, 33)};
    CHECK_THROWS_AS(verify_decay(plain, inputs), UsageError);
    EStableNet est = make_net(NetKind::estable_g, 1, 2, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(est, InitScheme::xavier_uniform, 34);
    CHECK_THROWS_AS(verify_decay(est, {}), UsageError);
  }
}

TEST_CASE("trace CSV export round-trips at full precision", "[diagnostics]") {
  EStableNet net = make_net(NetKind::estable_g, 1, 3, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
  init_params(net, InitScheme::kaiming_uniform, 41);
  Grid g(1, 32);
  std::vector<Field> inputs = {random_field(g, 42), random_field(g, 43)};
  DecayReport rep = verify_decay(net, inputs);
  REQUIRE(rep.pass);

  std::string path = tmp_path("esnet_trace_test.csv");
  export_trace(rep.traces, path);
  auto rows = read_csv(path);

  REQUIRE(rows.size() == 1 + 2 * 4);  // header + (M+1) rows per sample
  CHECK(rows[0] == std::vector<std::string>{"sample", "block", "modified_energy",
                                            "original_energy", "phi_increment_sq",
                                            "u_increment_sq", "identity_residual"});
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& tr = rep.traces[s];
    for (std::size_t n = 0; n <= 3; ++n) {
      const auto& row = rows[1 + s * 4 + n];
      REQUIRE(row.size() == 7);
      CHECK(row[0] == std::to_string(s));
      CHECK(row[1] == std::to_string(n));
      CHECK(std::stod(row[2]) == tr.modified[n]);
      CHECK(std::stod(row[3]) == tr.original[n]);
      if (n == 0) {
        CHECK(std::stod(row[4]) == 0.0);
        CHECK(std::stod(row[5]) == 0.0);
        CHECK(std::stod(row[6]) == 0.0);
      } else {
        CHECK(std::stod(row[4]) == tr.phi_increment_sq[n - 1]);
        CHECK(std::stod(row[5]) == tr.u_increment_sq[n - 1]);
        CHECK(std::stod(row[6]) == tr.identity_residual[n - 1]);
      }
    }
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(export_trace(rep.traces, "/nonexistent_dir/t.csv"), DataError);
}

TEST_CASE("block-state CSV export", "[diagnostics]") {
  SECTION("1D: one file per sample, a phi column per block state") {
    EStableNet net = make_net(NetKind::estable_g, 1, 2, 5, {1, 4, 1}, 0.1, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 51);
    Grid g(1, 16);
    std::vector<Field> inputs = {random_field(g, 52), random_field(g, 53), random_field(g, 54)};
    std::string dir = tmp_path("esnet_blocks_test");
    std::filesystem::create_directories(dir);
    export_block_fields(net, inputs, dir, 2);

    CHECK(std::filesystem::exists(dir + "/sample0_blocks.csv"));
    CHECK(std::filesystem::exists(dir + "/sample1_blocks.csv"));
    CHECK_FALSE(std::filesystem::exists(dir + "/sample2_blocks.csv"));

    auto rows = read_csv(dir + "/sample0_blocks.csv");
    REQUIRE(rows.size() == std::size_t(1 + 16));
    CHECK(rows[0] == std::vector<std::string>{"x", "phi0", "phi1", "phi2"});
    ForwardResult r = forward(net, pack_field(inputs[0]), nullptr);
    for (int i = 0; i < 16; ++i) {
      const auto& row = rows[std::size_t(1 + i)];
      REQUIRE(row.size() == 4);
      CHECK(std::stod(row[0]) == g.x(i));
      CHECK(std::stod(row[1]) == inputs[0].values[std::size_t(i)]);
      CHECK(std::stod(row[3]) == (*r.phiM().data)[std::size_t(i)]);
    }
    std::filesystem::remove_all(dir);
  }
  SECTION("2D: row per grid point with both coordinates") {
    EStableNet net = make_net(NetKind::estable_g, 2, 2, 3, {1, 3, 1}, 0.2, 0.25, 0.05);
    init_params(net, InitScheme::kaiming_uniform, 55);
    Grid g(2, 8);
    std::vector<Field> inputs = {random_field(g, 56)};
    std::string dir = tmp_path("esnet_blocks2d_test");
    std::filesystem::create_directories(dir);
    export_block_fields(net, inputs, dir);

    auto rows = read_csv(dir + "/sample0_blocks.csv");
    REQUIRE(rows.size() == std::size_t(1 + 64));
    CHECK(rows[0] == std::vector<std::string>{"x", "y", "phi0", "phi1", "phi2"});
    // spot-check the (i=2, j=5) row: row-major order, coordinates from the same axis
    const auto& row = rows[1 + 2 * 8 + 5];
    REQUIRE(row.size() == 5);
    CHECK(std::stod(row[0]) == g.x(2));
    CHECK(std::stod(row[1]) == g.x(5));
    CHECK(std::stod(row[2]) == inputs[0].values[2 * 8 + 5]);
    std::filesystem::remove_all(dir);
  }
}
