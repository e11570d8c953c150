#include "dronerl/checkpoint.hpp"

#include "dronerl/errors.hpp"
#include "dronerl/mapgen.hpp"
#include "dronerl/ppo.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

namespace dronerl::ckpt {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'O', 'N', 'E', 'R', 'L', '\0'};
constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 8;
constexpr std::size_t kTrailerSize = 4;

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

void put_model(std::ostream& out, const net::ModelConfig& m) {
  io::put_i32(out, m.obs_dim);
  io::put_u32(out, static_cast<std::uint32_t>(m.encoder_widths.size()));
  for (int w : m.encoder_widths) io::put_i32(out, w);
  io::put_i32(out, m.lstm_hidden);
  io::put_i32(out, m.n_actions);
  io::put_u64(out, m.seed);
}

net::ModelConfig get_model(std::istream& in) {
  net::ModelConfig m;
  m.obs_dim = io::get_i32(in);
  const auto layers = io::get_u32(in);
  if (layers > 64) throw io::FormatError("implausible encoder depth");
  m.encoder_widths.clear();
  for (std::uint32_t i = 0; i < layers; ++i) m.encoder_widths.push_back(io::get_i32(in));
  m.lstm_hidden = io::get_i32(in);
  m.n_actions = io::get_i32(in);
  m.seed = io::get_u64(in);
  m.validate();
  return m;
}

}  // namespace

std::string encode(const Checkpoint& c) {
  std::ostringstream payload;
  put_model(payload, c.model);
  io::put_u8(payload, static_cast<std::uint8_t>(c.mode));
  io::put_i64(payload, c.env_steps);
  io::put_i32(payload, c.update);
  io::put_i64(payload, c.params.adam_steps);
  io::put_u32(payload, static_cast<std::uint32_t>(c.params.size()));
  for (const auto& e : c.params) {
    io::put_string(payload, e.name);
    io::put_matrix(payload, e.value);
    io::put_matrix(payload, e.adam_m);
    io::put_matrix(payload, e.adam_v);
  }
  io::put_u8(payload, c.trainer_state ? 1 : 0);
  if (c.trainer_state) io::put_string(payload, *c.trainer_state);

  const std::string body = payload.str();
  std::ostringstream out;
  out.write(kMagic, sizeof(kMagic));
  io::put_u32(out, kFormatVersion);
  io::put_u64(out, body.size());
  out << body;
  std::string bytes = out.str();
  std::ostringstream trailer;
  io::put_u32(trailer, crc32_of(bytes));
  return bytes + trailer.str();
}

Checkpoint decode(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || bytes.substr(0, sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw io::FormatError("not a checkpoint (magic mismatch)");
  }
  if (bytes.size() < kHeaderSize + kTrailerSize) throw ChecksumError("checkpoint truncated");
  std::istringstream header(std::string(bytes.substr(sizeof(kMagic), kHeaderSize - sizeof(kMagic))));
  const std::uint32_t version = io::get_u32(header);
  if (version != kFormatVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kFormatVersion) + ")");
  }
  const std::uint64_t length = io::get_u64(header);
  if (length != bytes.size() - kHeaderSize - kTrailerSize) {
    throw ChecksumError("checkpoint length mismatch (truncated or padded file)");
  }
  std::istringstream trailer(std::string(bytes.substr(bytes.size() - kTrailerSize)));
  if (io::get_u32(trailer) != crc32_of(bytes.substr(0, bytes.size() - kTrailerSize))) {
    throw ChecksumError("checkpoint checksum mismatch");
  }

  std::istringstream in(std::string(bytes.substr(kHeaderSize, length)));
  Checkpoint c;
  c.model = get_model(in);
  const auto mode = io::get_u8(in);
  if (mode > 1) throw io::FormatError("bad mode tag");
  c.mode = static_cast<Mode>(mode);
  c.env_steps = io::get_i64(in);
  c.update = io::get_i32(in);
  c.params.adam_steps = io::get_i64(in);
  const auto n = io::get_u32(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = io::get_string(in, 4096);
    auto value = io::get_matrix<float>(in);
    auto m = io::get_matrix<float>(in);
    auto v = io::get_matrix<float>(in);
    const auto idx = c.params.add(std::move(name), std::move(value));
    c.params[idx].adam_m = std::move(m);
    c.params[idx].adam_v = std::move(v);
  }
  if (io::get_u8(in) != 0) c.trainer_state = io::get_string(in, std::size_t{1} << 30);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::string bytes = encode(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode(read_text_file(path));
  } catch (const io::FormatError& e) {
    throw io::FormatError(path.string() + ": " + e.what());
  }
}

Checkpoint snapshot(const ppo::Trainer& trainer) {
  Checkpoint c;
  c.model = trainer.model();
  c.mode = trainer.env_config().mode;
  c.params = trainer.params();
  c.env_steps = trainer.env_steps();
  c.update = trainer.updates();
  std::ostringstream state;
  trainer.save_state(state);
  c.trainer_state = state.str();
  return c;
}

void restore(ppo::Trainer& trainer, const Checkpoint& c) {
  if (!(c.model == trainer.model())) {
    throw ConfigError("checkpoint model configuration differs from the run configuration");
  }
  if (c.mode != trainer.env_config().mode) {
    throw ConfigError("checkpoint was trained in " + std::string(to_string(c.mode)) + " mode");
  }
  trainer.set_params(c.params);
  if (c.trainer_state) {
    std::istringstream in(*c.trainer_state);
    trainer.load_state(in);
  }
}

}  // namespace dronerl::ckpt
