// SPDX-License-Identifier: Apache-2.0

#include "rankstego/lm/remote.hpp"

#include <httplib.h>

#include <cmath>
#include <json.hpp>
#include <thread>

#include "rankstego/error.hpp"

namespace rankstego::lm {

using nlohmann::json;

std::string encode_request(const DistributionRequest& request) {
  json j;
  j["context"] = request.context;
  j["temperature"] = request.temperature;
  return j.dump();
}

DistributionRequest decode_request(std::string_view body) {
  try {
    json j = json::parse(body);
    DistributionRequest r;
    r.context = j.at("context").get<std::vector<TokenId>>();
    r.temperature = j.value("temperature", 1.0);
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad distribution request: ") + e.what());
  }
}

std::string encode_response(const Distribution& dist, std::size_t top_m) {
  const std::size_t listed =
      top_m == 0 ? dist.size() : std::min(top_m, dist.size());
  json probs = json::array();
  std::vector<double> listed_p;
  listed_p.reserve(listed);
  for (std::size_t r = 0; r < listed; ++r) {
    const TokenId id = dist.at_rank(r);
    probs.push_back({{"id", id}, {"p", dist.prob(id)}});
    listed_p.push_back(dist.prob(id));
  }
  json j;
  j["probs"] = std::move(probs);
  j["tail_mass"] =
      listed == dist.size() ? 0.0 : std::max(0.0, 1.0 - stable_sum(listed_p));
  return j.dump();
}

Distribution decode_response(std::string_view body, std::size_t vocab_size,
                             std::size_t min_listed) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array()) {
    throw ProtocolError("response lacks a \"probs\" array");
  }
  std::vector<double> probs(vocab_size, 0.0);
  std::vector<bool> seen(vocab_size, false);
  std::vector<double> listed_p;
  for (const auto& entry : j["probs"]) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("p") ||
        !entry["id"].is_number_unsigned() || !entry["p"].is_number()) {
      throw ProtocolError("malformed probability entry");
    }
    const auto id = entry["id"].get<std::uint64_t>();
    if (id >= vocab_size) {
      throw ProtocolError("token id " + std::to_string(id) +
                          " outside vocabulary");
    }
    if (seen[id]) throw ProtocolError("duplicate token id in response");
    seen[id] = true;
    const double p = entry["p"].get<double>();
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("negative or non-finite probability");
    }
    probs[id] = p;
    listed_p.push_back(p);
  }
  const std::size_t listed = listed_p.size();
  double tail = 0.0;
  if (listed < vocab_size) {
    if (!j.contains("tail_mass") || !j["tail_mass"].is_number()) {
      throw ProtocolError("partial listing without \"tail_mass\"");
    }
    if (listed < min_listed) {
      throw ValidationError("response lists " + std::to_string(listed) +
                            " tokens, need at least " +
                            std::to_string(min_listed));
    }
    tail = j["tail_mass"].get<double>();
    if (!(tail >= 0.0) || !std::isfinite(tail)) {
      throw ValidationError("negative or non-finite tail mass");
    }
  }
  const double total = stable_sum(listed_p) + tail;
  if (std::fabs(total - 1.0) > kRemoteSumTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(total));
  }
  if (listed < vocab_size) {
    const double share = tail / static_cast<double>(vocab_size - listed);
    for (std::size_t i = 0; i < vocab_size; ++i) {
      if (!seen[i]) probs[i] = share;
    }
  }
  return Distribution(std::move(probs));
}

Distribution apply_temperature(const Distribution& dist, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParameterError("temperature must be positive");
  }
  if (temperature == 1.0) return dist;
  const double power = 1.0 / temperature;
  const double top = dist.prob(dist.at_rank(0));
  std::vector<double> w(dist.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::pow(dist.probs()[i] / top, power);
  }
  const double total = stable_sum(w);
  for (double& x : w) x /= total;
  return Distribution(std::move(w));
}

RemoteProvider::RemoteProvider(std::string endpoint, Vocabulary vocab,
                               double temperature, RemoteOptions options)
    : endpoint_(std::move(endpoint)),
      vocab_(std::move(vocab)),
      temperature_(temperature),
      options_(options) {
  if (!(temperature_ > 0.0)) throw ParameterError("temperature must be > 0");
}

Distribution RemoteProvider::compute(std::span<const TokenId> history,
                                     std::span<const TokenId> context) const {
  DistributionRequest request;
  request.context.assign(history.begin(), history.end());
  request.context.insert(request.context.end(), context.begin(), context.end());
  request.temperature = temperature_;

  httplib::Client client(endpoint_);
  if (!client.is_valid()) {
    throw TransportError("invalid endpoint: " + endpoint_);
  }
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  auto res = client.Post(std::string(kDistributionPath),
                         encode_request(request), "application/json");
  if (!res) {
    throw TransportError("request to " + endpoint_ +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProtocolError("endpoint answered HTTP " +
                        std::to_string(res->status));
  }
  return decode_response(res->body, vocab_.size(), options_.min_listed);
}

struct DistributionServer::Impl {
  const ModelProvider& provider;
  std::size_t top_m;
  httplib::Server server;
  std::thread worker;
};

DistributionServer::DistributionServer(const ModelProvider& provider,
                                       std::size_t top_m)
    : impl_(new Impl{provider, top_m, {}, {}}) {
  impl_->server.Post(
      std::string(kDistributionPath),
      [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
        try {
          DistributionRequest r = decode_request(req.body);
          Distribution d = impl->provider.next_distribution(r.context, {});
          d = apply_temperature(d, r.temperature);
          res.set_content(encode_response(d, impl->top_m), "application/json");
        } catch (const Error& e) {
          res.status = 400;
          res.set_content(e.what(), "text/plain");
        }
      });
}

DistributionServer::~DistributionServer() { stop(); }

int DistributionServer::start(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw TransportError("could not bind " + host);
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void DistributionServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace rankstego::lm
