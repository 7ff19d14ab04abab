#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/osv.hpp"

namespace ulens {

std::string LiveTransport::default_base_url() {
  if (const char* env = std::getenv("UPGRADE_LENS_OSV_URL"); env && *env) return env;
  return "https://api.osv.dev";
}

LiveTransport::LiveTransport(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(std::move(policy)) {
  if (policy_.attempts < 1) throw DomainError("retry policy needs at least one attempt");
  if (!policy_.sleep) policy_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string LiveTransport::post(const std::string& path, const std::string& body) {
  std::string last_error;
  for (int attempt = 0; attempt < policy_.attempts; ++attempt) {
    if (attempt > 0) {
      const auto i = std::min<std::size_t>(attempt - 1, policy_.backoff.size() - 1);
      policy_.sleep(policy_.backoff.empty() ? std::chrono::milliseconds(0) : policy_.backoff[i]);
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(policy_.timeout);
    client.set_read_timeout(policy_.timeout);
    client.set_write_timeout(policy_.timeout);
    const auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = fmt::format("HTTP {}", res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw TransportError(fmt::format("OSV request to {}{} failed: {}", base_url_, path, last_error));
}

}  // namespace ulens
