#include "ice/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <json.hpp>

#include "ice/errors.hpp"

namespace ice {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

const DenseNet& Checkpoint::network(const std::string& name) const {
  for (const auto& [n, net] : networks)
    if (n == name) return net;
  throw Error("checkpoint has no network named '" + name + "'");
}

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<std::pair<std::string, const DenseNet*>>& networks) {
  nlohmann::json header;
  header["format"] = "ice-checkpoint";
  header["version"] = 1;
  header["seed"] = meta.seed;
  header["update_count"] = meta.update_count;
  header["extra"] = meta.extra;
  header["networks"] = nlohmann::json::array();
  for (const auto& [name, net] : networks) {
    nlohmann::json activations = nlohmann::json::array();
    for (const auto& layer : net->layers()) activations.push_back(activation_name(layer.activation));
    header["networks"].push_back(
        {{"name", name}, {"widths", net->widths()}, {"activations", activations}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << header.dump() << '\n';
  for (const auto& [name, net] : networks) {
    const auto params = net->flatten();
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint " + path + " has a malformed header: " + e.what());
  }
  if (header.value("format", "") != "ice-checkpoint")
    throw Error("checkpoint " + path + " is not an ice checkpoint");

  Checkpoint cp;
  cp.meta.seed = header.at("seed").get<std::uint64_t>();
  cp.meta.update_count = header.at("update_count").get<std::uint64_t>();
  cp.meta.extra = header.at("extra").get<std::map<std::string, std::string>>();
  for (const auto& spec : header.at("networks")) {
    std::vector<Activation> acts;
    for (const auto& a : spec.at("activations")) acts.push_back(parse_activation(a.get<std::string>()));
    DenseNet net(spec.at("widths").get<std::vector<std::size_t>>(), acts);
    std::vector<double> params(net.parameter_count());
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!in) throw Error("checkpoint " + path + " is truncated");
    net.unflatten(params);
    cp.networks.emplace_back(spec.at("name").get<std::string>(), std::move(net));
  }
  return cp;
}

}  // namespace ice
