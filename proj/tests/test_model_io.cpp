#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aeface/model_io.hpp"

using namespace aeface;
namespace fs = std::filesystem;

namespace {

Network sample_net(std::uint64_t seed) {
  Rng rng(seed);
  Network net;
  net.input_dim = 6;
  net.layers.push_back(init_layer(6, 4, Activation::ReLU, rng));
  net.layers.push_back(init_layer(4, 3, Activation::Sigmoid, rng));
  net.layers.push_back(init_layer(3, 2, Activation::Softmax, rng));
  return net;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("model round-trip is bitwise exact") {
  const fs::path dir = fs::temp_directory_path() / "aeface_model_io";
  fs::create_directories(dir);
  const Network net = sample_net(5);

  save_model(net, dir / "a.aefv");
  const Network loaded = load_model(dir / "a.aefv");
  save_model(loaded, dir / "b.aefv");

  CHECK(read_bytes(dir / "a.aefv") == read_bytes(dir / "b.aefv"));
  CHECK(loaded.input_dim == net.input_dim);
  REQUIRE(loaded.layers.size() == net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    CHECK(loaded.layers[l].weights == net.layers[l].weights);
    CHECK(loaded.layers[l].bias == net.layers[l].bias);
    CHECK(loaded.layers[l].activation == net.layers[l].activation);
  }
  fs::remove_all(dir);
}

TEST_CASE("loaded model forwards identically") {
  const fs::path dir = fs::temp_directory_path() / "aeface_model_fw";
  fs::create_directories(dir);
  const Network net = sample_net(9);
  save_model(net, dir / "m.aefv");
  const Network loaded = load_model(dir / "m.aefv");

  Rng rng(10);
  Matrix x(3, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = rng.uniform(-1.0, 1.0);
  }
  CHECK(forward(net, x).output() == forward(loaded, x).output());
  fs::remove_all(dir);
}

TEST_CASE("bad magic and truncation are model errors") {
  const fs::path dir = fs::temp_directory_path() / "aeface_model_err";
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "bad.aefv", std::ios::binary);
    out << "NOPE then some bytes";
  }
  CHECK_THROWS_AS(load_model(dir / "bad.aefv"), ModelError);

  save_model(sample_net(3), dir / "ok.aefv");
  const std::string bytes = read_bytes(dir / "ok.aefv");
  {
    std::ofstream out(dir / "cut.aefv", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_model(dir / "cut.aefv"), ModelError);

  CHECK_THROWS_AS(load_model(dir / "missing.aefv"), IoError);
  fs::remove_all(dir);
}
