#include "km/model_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace km {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(const std::vector<uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
  }
  const size_t rem = bytes.size() - i;
  if (rem == 1) {
    const uint32_t v = bytes[i] << 16;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) {
    throw std::runtime_error("base64 payload length must be a multiple of 4");
  }
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        vals[k] = 0;
        ++pad;
      } else {
        vals[k] = b64_value(c);
        if (vals[k] < 0 || pad > 0) {
          throw std::runtime_error("invalid base64 payload");
        }
      }
    }
    const uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back((v >> 16) & 0xff);
    if (pad < 2) out.push_back((v >> 8) & 0xff);
    if (pad < 1) out.push_back(v & 0xff);
  }
  return out;
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  model.params.validate();
  const int d = model.dim;

  std::vector<uint8_t> theta_bytes;
  theta_bytes.reserve(model.user_ids.size() * d * sizeof(double));
  for (size_t k = 0; k < model.user_ids.size(); ++k) {
    const auto it = model.params.theta.find(static_cast<int>(k));
    if (it == model.params.theta.end()) {
      throw std::invalid_argument("model is missing theta for user slot " +
                                  std::to_string(k));
    }
    for (int j = 0; j < d; ++j) {
      const double v = it->second[j];
      uint8_t buf[sizeof(double)];
      std::memcpy(buf, &v, sizeof(double));
      theta_bytes.insert(theta_bytes.end(), buf, buf + sizeof(double));
    }
  }

  const size_t bytes_per_item = (static_cast<size_t>(d) + 7) / 8;
  std::vector<uint8_t> psi_bytes(model.item_ids.size() * bytes_per_item, 0);
  for (size_t k = 0; k < model.item_ids.size(); ++k) {
    const auto it = model.params.psi.find(static_cast<int>(k));
    if (it == model.params.psi.end()) {
      throw std::invalid_argument("model is missing psi for item slot " +
                                  std::to_string(k));
    }
    for (int j = 0; j < d; ++j) {
      if (it->second.bit(j)) {
        psi_bytes[k * bytes_per_item + j / 8] |= uint8_t{1} << (j % 8);
      }
    }
  }

  nlohmann::json j;
  j["format"] = "km-model";
  j["version"] = 1;
  j["dim"] = d;
  j["r_max"] = model.r_max;
  j["users"] = model.user_ids;
  j["items"] = model.item_ids;
  j["theta"] = base64_encode(theta_bytes);
  j["psi"] = base64_encode(psi_bytes);

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "km-model" || j.value("version", 0) != 1) {
    throw std::runtime_error(path.string() + ": not a km-model v1 file");
  }
  ModelFile model;
  model.dim = j.at("dim").get<int>();
  model.r_max = j.at("r_max").get<double>();
  model.user_ids = j.at("users").get<std::vector<int>>();
  model.item_ids = j.at("items").get<std::vector<int>>();
  model.params.dim = model.dim;

  const std::vector<uint8_t> theta_bytes =
      base64_decode(j.at("theta").get<std::string>());
  const size_t want_theta =
      model.user_ids.size() * model.dim * sizeof(double);
  if (theta_bytes.size() != want_theta) {
    throw std::runtime_error(path.string() + ": theta payload has " +
                             std::to_string(theta_bytes.size()) +
                             " bytes, expected " + std::to_string(want_theta));
  }
  for (size_t k = 0; k < model.user_ids.size(); ++k) {
    Eigen::VectorXd th(model.dim);
    for (int jx = 0; jx < model.dim; ++jx) {
      double v;
      std::memcpy(&v, theta_bytes.data() + (k * model.dim + jx) * sizeof(double),
                  sizeof(double));
      th[jx] = v;
    }
    model.params.theta.emplace(static_cast<int>(k), SimplexVector(th));
  }

  const size_t bytes_per_item = (static_cast<size_t>(model.dim) + 7) / 8;
  const std::vector<uint8_t> psi_bytes =
      base64_decode(j.at("psi").get<std::string>());
  if (psi_bytes.size() != model.item_ids.size() * bytes_per_item) {
    throw std::runtime_error(path.string() + ": psi payload size mismatch");
  }
  for (size_t k = 0; k < model.item_ids.size(); ++k) {
    std::vector<uint8_t> bits(model.dim, 0);
    for (int jx = 0; jx < model.dim; ++jx) {
      bits[jx] =
          (psi_bytes[k * bytes_per_item + jx / 8] >> (jx % 8)) & 1u;
    }
    model.params.psi.emplace(static_cast<int>(k),
                             IndicatorVector(std::move(bits)));
  }
  return model;
}

void save_report(const TrainReport& report,
                 const std::filesystem::path& path) {
  nlohmann::json j;
  j["rmse_per_iteration"] = report.rmse_per_iteration;
  j["wall_time_lcqp_seconds"] = report.wall_time_lcqp;
  j["wall_time_bqp_seconds"] = report.wall_time_bqp;
  j["phase_histogram"] = {
      {"uniform_inactive", report.phase_histogram[0]},
      {"uniform_spectrum", report.phase_histogram[1]},
      {"general_inactive", report.phase_histogram[2]},
      {"general_eigensolve", report.phase_histogram[3]},
  };
  j["dual_solves"] = report.dual_solves;
  j["dual_converged"] = report.dual_converged;
  j["skipped_items"] = report.skipped_items;
  j["skipped_users"] = report.skipped_users;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

void save_rmse_csv(const TrainReport& report,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "iteration,rmse\n";
  for (size_t k = 0; k < report.rmse_per_iteration.size(); ++k) {
    out << (k + 1) << ',' << report.rmse_per_iteration[k] << '\n';
  }
}

}  // namespace km
