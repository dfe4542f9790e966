#include <regex>

#include "httplib.h"

#include "qsbse/sampler.hpp"

namespace qsbse {

std::vector<Sample> parse_remote_reply(const Qubo& q, const std::string& body, std::size_t reads) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("sampler reply is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array())
    throw ProtocolError("sampler reply lacks a 'samples' array");

  std::vector<Sample> raw;
  for (const auto& s : doc["samples"]) {
    if (!s.is_object() || !s.contains("assignment") || !s["assignment"].is_array())
      throw ProtocolError("sample without an 'assignment' array");
    const auto& a = s["assignment"];
    if (a.size() != q.n_total())
      throw ProtocolError("sample assignment has length " + std::to_string(a.size()) +
                          ", expected " + std::to_string(q.n_total()));
    Bits x;
    x.reserve(a.size());
    for (const auto& v : a) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
        throw ProtocolError("assignment entries must be 0 or 1");
      x.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    if (s.contains("energy") && !s["energy"].is_number())
      throw ProtocolError("sample energy must be a number");
    std::size_t occ = 1;
    if (s.contains("occurrences")) {
      if (!s["occurrences"].is_number_integer() || s["occurrences"].get<long long>() < 1)
        throw ProtocolError("occurrences must be a positive integer");
      occ = s["occurrences"].get<std::size_t>();
    }
    // Reported energies are advisory; the local evaluation is authoritative.
    const double e = q.energy(x);
    raw.push_back(Sample{std::move(x), e, occ});
  }
  std::sort(raw.begin(), raw.end(), [](const Sample& a, const Sample& b) {
    return a.energy != b.energy ? a.energy < b.energy : a.assignment < b.assignment;
  });
  std::vector<Sample> out;
  for (auto& s : raw) {
    if (!out.empty() && out.back().assignment == s.assignment)
      out.back().occurrences += s.occurrences;
    else
      out.push_back(std::move(s));
  }
  if (out.size() > reads) out.resize(reads);
  return out;
}

std::vector<Sample> remote_sample(const Qubo& q, const SamplerSpec& spec) {
  spec.validate();
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(spec.endpoint, m, url))
    throw UsageError("remote endpoint must look like http://host:port/path");
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  auto body = to_json(q);
  body["num_reads"] = spec.reads;

  httplib::Client client(base);
  const auto sec = spec.timeout_ms / 1000;
  const auto usec = (spec.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res)
    throw TransportError("remote sampler at " + spec.endpoint + " failed: " +
                         httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("remote sampler returned HTTP " + std::to_string(res->status));
  return parse_remote_reply(q, res->body, spec.reads);
}

}  // namespace qsbse
