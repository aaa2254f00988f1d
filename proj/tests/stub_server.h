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

#ifndef NOISY_TESTS_STUB_SERVER_H_
#define NOISY_TESTS_STUB_SERVER_H_

#include <functional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

namespace noisy::testing {

// Mask-fill HTTP server on an ephemeral loopback port, serving POST
// <prefix>/fill-mask from a handler.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit StubServer(Handler handler, std::string prefix = "") {
    server_.Post(prefix + "/fill-mask", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  // Handler answering every mask with `word`, reporting `model`.
  static Handler Filling(std::string word, std::string model = "stub-bert") {
    return [word, model](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const std::string text = body.at("text").get<std::string>();
      size_t masks = 0;
      for (size_t p = text.find("[MASK]"); p != std::string::npos;
           p = text.find("[MASK]", p + 6)) {
        ++masks;
      }
      const nlohmann::json reply = {
          {"words", std::vector<std::string>(masks, word)}, {"model", model}};
      res.set_content(reply.dump(), "application/json");
    };
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// A loopback port with nothing listening on it.
inline int ClosedPort() {
  httplib::Server probe;
  return probe.bind_to_any_port("127.0.0.1");
}

}  // namespace noisy::testing

#endif  // NOISY_TESTS_STUB_SERVER_H_
