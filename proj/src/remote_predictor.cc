//
// Copyright 2026 The noisy-instruct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <httplib.h>
#include <json.hpp>

#include "noisy/errors.h"
#include "noisy/predictor.h"

namespace noisy {
namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

constexpr std::string_view kProbeText = "The [MASK] is ready.";

}  // namespace

RemotePredictor::RemotePredictor(RemotePredictorOptions options)
    : options_(std::move(options)),
      in_flight_(std::max(1, options_.max_in_flight)) {
  const std::string& url = options_.base_url;
  const size_t scheme_end = url.find("://");
  if (url.empty() || scheme_end == std::string::npos) {
    throw ConfigError("predictor URL must look like http://host:port, got \"" +
                      url + "\"");
  }
  if (url.substr(0, scheme_end) != "http") {
    throw ConfigError("unsupported predictor URL scheme in \"" + url +
                      "\" (only http is supported)");
  }
  const size_t path_begin = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_begin);
  if (path_begin != std::string::npos) {
    path_prefix_ = url.substr(path_begin);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
}

MaskAnswer RemotePredictor::Predict(const MaskQuery& query) {
  SlotGuard slot(in_flight_);
  httplib::Client client(scheme_host_port_);
  if (!client.is_valid()) {
    throw ConfigError("unsupported predictor URL: " + options_.base_url);
  }
  const auto timeout = options_.timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const nlohmann::json body = {{"text", query.text()}};
  auto res = client.Post(path_prefix_ + "/fill-mask", body.dump(),
                         "application/json");
  if (!res) {
    throw PredictorUnavailable("fill-mask request to " + options_.base_url +
                               " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw PredictorUnavailable("fill-mask returned HTTP " +
                               std::to_string(res->status));
  }

  MaskAnswer answer;
  try {
    const nlohmann::json reply = nlohmann::json::parse(res->body);
    if (!reply.is_object() || !reply.contains("words") ||
        !reply["words"].is_array()) {
      throw MalformedResponse("fill-mask reply has no \"words\" array");
    }
    for (const auto& w : reply["words"]) {
      if (!w.is_string()) {
        throw MalformedResponse("fill-mask reply has a non-string word");
      }
      answer.words.push_back(w.get<std::string>());
    }
    if (reply.contains("model") && reply["model"].is_string()) {
      answer.model = reply["model"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("fill-mask reply is not JSON: ") +
                            e.what());
  }
  ValidateAnswer(query, answer);
  return answer;
}

HealthStatus RemotePredictor::HealthCheck() {
  try {
    const MaskAnswer answer = Predict(MaskQuery(std::string(kProbeText)));
    return {true, "remote:" + (answer.model.empty() ? "unknown" : answer.model),
            ""};
  } catch (const Error& e) {
    return {false, "remote:" + options_.base_url, e.what()};
  }
}

}  // namespace noisy
