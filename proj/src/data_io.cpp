#include "km/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "km/rng.hpp"

namespace km {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, size_t line_no,
                             const std::string& why) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                           ": " + why);
}

long parse_long(std::string_view tok, const std::filesystem::path& path,
                size_t line_no, const char* what) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(path, line_no,
               std::string("bad ") + what + " field '" + std::string(tok) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line,
                                           std::string_view sep) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

RatingDataset load_movielens(const std::filesystem::path& path,
                             std::string_view sep) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  constexpr double kRMax = 5.0;
  std::vector<RatingDataset::RawTriple> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line, sep);
    if (fields.size() != 4) {
      parse_fail(path, line_no,
                 "expected 4 '" + std::string(sep) + "'-separated fields, got " +
                     std::to_string(fields.size()));
    }
    const long user = parse_long(fields[0], path, line_no, "user");
    const long item = parse_long(fields[1], path, line_no, "item");
    const long rating = parse_long(fields[2], path, line_no, "rating");
    parse_long(fields[3], path, line_no, "timestamp");  // discarded
    if (rating < 1 || rating > 5) {
      parse_fail(path, line_no,
                 "rating " + std::to_string(rating) + " outside [1,5]");
    }
    raw.push_back({static_cast<int>(user), static_cast<int>(item),
                   static_cast<double>(rating) / kRMax, Split::Train});
  }
  if (raw.empty()) {
    std::cerr << "warning: " << path.string() << " contains no ratings\n";
  }
  return RatingDataset(raw, kRMax);
}

}  // namespace

RatingDataset load_ml100k(const std::filesystem::path& path) {
  return load_movielens(path, "\t");
}

RatingDataset load_ml1m(const std::filesystem::path& path) {
  return load_movielens(path, "::");
}

RatingDataset split_dataset(const RatingDataset& data,
                            const SplitConfig& cfg) {
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  }
  const size_t n = data.triples().size();
  if (n == 0) {
    throw std::invalid_argument("cannot split an empty dataset");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(derive_stream(cfg.seed, 0x5117));
  for (size_t k = n - 1; k > 0; --k) {
    const size_t j = rng.next_u64() % (k + 1);
    std::swap(order[k], order[j]);
  }
  size_t n_train = static_cast<size_t>(
      std::llround(cfg.train_fraction * static_cast<double>(n)));
  n_train = std::clamp(n_train, size_t{1}, n - 1);
  std::vector<Split> splits(n, Split::Test);
  for (size_t k = 0; k < n_train; ++k) splits[order[k]] = Split::Train;
  return data.with_splits(splits);
}

RatingDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_users < 1 || cfg.num_items < 1) {
    throw std::invalid_argument("synthetic grid must be at least 1x1");
  }
  Rng rng(derive_stream(cfg.seed, 0xd1));
  std::vector<RatingDataset::RawTriple> raw;
  raw.reserve(static_cast<size_t>(cfg.num_users) * cfg.num_items);
  for (int u = 1; u <= cfg.num_users; ++u) {
    for (int i = 1; i <= cfg.num_items; ++i) {
      raw.push_back({u, i, rng.next_uniform(), Split::Train});
    }
  }
  return RatingDataset(raw, 1.0);
}

void save_jsonl(const RatingDataset& data, std::ostream& out) {
  for (const auto& t : data.triples()) {
    nlohmann::json j;
    j["u"] = data.raw_user_id(t.user);
    j["i"] = data.raw_item_id(t.item);
    j["p"] = t.p;
    j["split"] = t.split == Split::Train ? "train" : "test";
    out << j.dump() << '\n';
  }
}

void save_jsonl(const RatingDataset& data,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  save_jsonl(data, out);
}

RatingDataset load_jsonl(std::istream& in) {
  std::vector<RatingDataset::RawTriple> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("jsonl line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    const std::string split = j.at("split").get<std::string>();
    if (split != "train" && split != "test") {
      throw std::runtime_error("jsonl line " + std::to_string(line_no) +
                               ": unknown split '" + split + "'");
    }
    raw.push_back({j.at("u").get<int>(), j.at("i").get<int>(),
                   j.at("p").get<double>(),
                   split == "train" ? Split::Train : Split::Test});
  }
  return RatingDataset(raw, 1.0);
}

RatingDataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return load_jsonl(in);
}

}  // namespace km
