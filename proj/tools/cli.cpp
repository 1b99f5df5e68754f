// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "rankstego/codec/codebook.hpp"
#include "rankstego/error.hpp"
#include "rankstego/lm/ngram.hpp"
#include "rankstego/lm/remote.hpp"
#include "rankstego/metrics.hpp"
#include "rankstego/stego/stego.hpp"

namespace rankstego::cli {

namespace {

namespace fs = std::filesystem;

// Missing files and unparsable flag values are usage errors.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& data) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw UsageError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

lm::Smoothing parse_smoothing(const std::string& text) {
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw UsageError("smoothing must be an integer or a/b fraction: " + text);
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return lm::Smoothing(parse_int(text));
  const std::int64_t den = parse_int(std::string_view(text).substr(slash + 1));
  if (den <= 0) throw UsageError("smoothing denominator must be positive");
  return lm::Smoothing(parse_int(std::string_view(text).substr(0, slash)), den);
}

std::shared_ptr<const lm::NgramModel> load_model(const std::string& path) {
  std::istringstream in(read_file(path));
  return std::make_shared<const lm::NgramModel>(lm::NgramModel::load(in));
}

codec::Codebook load_codebook(const std::string& path) {
  std::istringstream in(read_file(path));
  return codec::Codebook::load(in);
}

// Options shared by the session subcommands.
struct SessionOptions {
  std::string config;
  std::string model;
  std::string codebook;
  std::string endpoint;
  std::string key_hex;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd, bool needs_codebook) {
    cmd->add_option("--config", config, "session config (JSON)")->required();
    cmd->add_option("--model", model, "n-gram model file (NGM1)")->required();
    if (needs_codebook) {
      cmd->add_option("--codebook", codebook, "codebook file (RCB1)")
          ->required();
    }
    cmd->add_option("--endpoint", endpoint,
                    "remote inference endpoint; the model file then only "
                    "supplies the vocabulary");
    cmd->add_option("--key-hex", key_hex, "64 hex digit key (overrides " +
                                              std::string(kKeyEnv) + ")");
    cmd->add_option("--seed", seed, "override the config rng_seed");
  }
};

struct Session {
  std::shared_ptr<const lm::NgramModel> model;
  std::unique_ptr<lm::ModelProvider> provider;
  std::unique_ptr<lm::ModelProvider> scorer;
  stego::StegoConfig config;
};

codec::SecretKey resolve_key(const SessionOptions& opts,
                             const stego::SessionFile& session,
                             const std::map<std::string, std::string>& env) {
  std::optional<std::string> hex;
  if (!opts.key_hex.empty()) {
    hex = opts.key_hex;
  } else if (auto it = env.find(kKeyEnv); it != env.end()) {
    hex = it->second;
  } else if (session.key_hex) {
    hex = *session.key_hex;
  }
  if (!hex) {
    throw UsageError(std::string("no key: pass --key-hex, set ") + kKeyEnv +
                     ", or put \"key\" in the config");
  }
  try {
    return codec::SecretKey::from_hex(*hex);
  } catch (const ParameterError&) {
    // The offending value is a secret; do not echo it.
    throw UsageError("key must be 64 hex digits");
  }
}

std::unique_ptr<lm::ModelProvider> make_provider(
    const std::shared_ptr<const lm::NgramModel>& model,
    const std::string& endpoint, double temperature) {
  if (endpoint.empty()) {
    return std::make_unique<lm::NgramProvider>(model, temperature);
  }
  return std::make_unique<lm::RemoteProvider>(endpoint, model->vocabulary(),
                                              temperature);
}

Session open_session(const SessionOptions& opts,
                     const std::map<std::string, std::string>& env) {
  Session s;
  const stego::SessionFile file = stego::parse_session(read_file(opts.config));
  s.model = load_model(opts.model);
  const codec::SecretKey key = resolve_key(opts, file, env);
  s.config = stego::make_config(file, s.model->vocabulary(), key);
  if (opts.seed) s.config.rng_seed = *opts.seed;
  s.provider = make_provider(s.model, opts.endpoint, s.config.temperature);
  s.scorer = make_provider(s.model, opts.endpoint, 1.0);
  return s;
}

std::string format_tokens(const std::vector<lm::TokenId>& tokens) {
  std::string out;
  for (lm::TokenId t : tokens) out += std::to_string(t) + '\n';
  return out;
}

std::vector<lm::TokenId> parse_tokens(const std::string& text,
                                      const lm::Vocabulary& vocab) {
  std::vector<lm::TokenId> out;
  for (auto word : lm::split_words(text)) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc{} || p != word.data() + word.size()) {
      throw DesyncError("stego token file contains a non-numeric entry");
    }
    if (v >= vocab.size()) throw DesyncError("stego token id out of range");
    out.push_back(static_cast<lm::TokenId>(v));
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!lm::split_words(line).empty()) lines.push_back(line);
  }
  return lines;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) {
      throw UsageError(std::string("bad ") + what + " list: " + text);
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const std::map<std::string, std::string>& env) {
  CLI::App app{"Rank-token mapping text steganography", "rankstego"};
  app.require_subcommand(1);

  // train-model
  std::string corpus, model_out, smoothing = "1/10";
  int order = 3;
  auto* train_model = app.add_subcommand(
      "train-model", "train the reference n-gram model from a text corpus");
  train_model->add_option("--corpus", corpus, "UTF-8 corpus, one sentence per line")
      ->required();
  train_model->add_option("--order", order, "n-gram order")->capture_default_str();
  train_model->add_option("--smoothing", smoothing, "add-k constant, integer or a/b")
      ->capture_default_str();
  train_model->add_option("--out", model_out, "output model file")->required();

  // train-codebook
  SessionOptions cb_opts;
  std::string calibration, codebook_out;
  std::uint32_t table_size = codec::kDefaultTableSize;
  auto* train_codebook = app.add_subcommand(
      "train-codebook", "calibrate the rank codebook under the private context");
  cb_opts.add_to(train_codebook, false);
  train_codebook->add_option("--calibration", calibration,
                             "calibration messages, one per line")
      ->required();
  train_codebook->add_option("--table-size", table_size, "direct table size K")
      ->capture_default_str();
  train_codebook->add_option("--out", codebook_out, "output codebook file")
      ->required();

  // embed
  SessionOptions embed_opts;
  std::string message_file, stego_out, emit = "tokens";
  auto* embed = app.add_subcommand("embed", "hide a message in generated text");
  embed_opts.add_to(embed, true);
  embed->add_option("--message-file", message_file, "secret message (UTF-8)")
      ->required();
  embed->add_option("--out", stego_out, "stego output file")->required();
  embed->add_option("--emit", emit, "output channel encoding")
      ->check(CLI::IsMember({"tokens", "text"}))
      ->capture_default_str();

  // extract
  SessionOptions extract_opts;
  std::string stego_in, message_out, format = "tokens";
  auto* extract = app.add_subcommand("extract", "recover a message");
  extract_opts.add_to(extract, true);
  extract->add_option("--in", stego_in, "stego input file")->required();
  extract->add_option("--out", message_out, "recovered message file")->required();
  extract->add_option("--format", format, "input channel encoding")
      ->check(CLI::IsMember({"tokens", "text"}))
      ->capture_default_str();

  // verify
  SessionOptions verify_opts;
  std::string verify_message, receiver_config;
  auto* verify = app.add_subcommand(
      "verify", "embed then extract and report stage-by-stage equality");
  verify_opts.add_to(verify, true);
  verify->add_option("--message-file", verify_message, "secret message (UTF-8)")
      ->required();
  verify->add_option("--receiver-config", receiver_config,
                     "extract under a different session config");

  // sweep
  SessionOptions sweep_opts;
  std::string messages_file, report_out, alphas = "0.4,0.6,0.8",
                                         betas = "1,2,3,4";
  std::size_t threads = 1;
  bool no_timing = false;
  auto* sweep = app.add_subcommand("sweep", "alpha/beta parameter sweep");
  sweep_opts.add_to(sweep, true);
  sweep->add_option("--messages", messages_file, "messages, one per line")
      ->required();
  sweep->add_option("--alphas", alphas, "comma-separated alpha grid")
      ->capture_default_str();
  sweep->add_option("--betas", betas, "comma-separated beta grid")
      ->capture_default_str();
  sweep->add_option("--out", report_out, "JSON lines report")->required();
  sweep->add_option("--threads", threads, "worker threads")->capture_default_str();
  sweep->add_flag("--no-timing", no_timing,
                  "omit wall-clock fields so reruns are byte-identical");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train_model) {
      const lm::NgramModel m = lm::NgramModel::train_text(
          read_file(corpus), order, parse_smoothing(smoothing));
      std::ostringstream bytes;
      m.save(bytes);
      write_atomic(model_out, bytes.str());
      out << "model: order " << m.order() << ", vocabulary "
          << m.vocabulary().size() << " tokens -> " << model_out << '\n';
    } else if (*train_codebook) {
      Session s = open_session(cb_opts, env);
      std::vector<std::vector<lm::TokenId>> messages;
      for (const auto& line : read_lines(read_file(calibration))) {
        messages.push_back(s.model->vocabulary().tokenize(line));
      }
      if (messages.empty()) throw UsageError("calibration file has no messages");
      const codec::Codebook cb = stego::calibrate_codebook(
          *s.provider, messages, s.config.private_context, table_size);
      std::ostringstream bytes;
      cb.save(bytes);
      write_atomic(codebook_out, bytes.str());
      out << "codebook: K=" << cb.table_size() << ", escape width "
          << cb.escape_width() << " -> " << codebook_out << '\n';
    } else if (*embed) {
      Session s = open_session(embed_opts, env);
      const codec::Codebook cb = load_codebook(embed_opts.codebook);
      const stego::EmbedResult r =
          stego::embed(*s.provider, cb, s.config, read_file(message_file));
      if (r.unknown_words > 0) {
        err << "warning: " << r.unknown_words
            << " word(s) not in the vocabulary were replaced by <unk>\n";
      }
      write_atomic(stego_out,
                   emit == "tokens"
                       ? format_tokens(r.stego_tokens)
                       : s.model->vocabulary().detokenize(r.stego_tokens) + '\n');
      std::size_t gated = 0;
      for (const auto& rec : r.trace) gated += rec.gated ? 1 : 0;
      out << "embedded " << r.message_tokens.size() << " tokens in "
          << r.stego_tokens.size() << " stego tokens (" << gated
          << " gated)\n";
    } else if (*extract) {
      Session s = open_session(extract_opts, env);
      const codec::Codebook cb = load_codebook(extract_opts.codebook);
      const std::string text = read_file(stego_in);
      std::vector<lm::TokenId> tokens;
      if (format == "tokens") {
        tokens = parse_tokens(text, s.model->vocabulary());
      } else {
        // Surfaces are whitespace-free, so the word split is unambiguous;
        // anything unknown cannot have come from the sender.
        for (auto w : lm::split_words(text)) {
          auto id = s.model->vocabulary().find(w);
          if (!id) throw DesyncError("stego text contains an unknown word");
          tokens.push_back(*id);
        }
      }
      write_atomic(message_out, stego::extract(*s.provider, cb, s.config, tokens));
      out << "extracted message -> " << message_out << '\n';
    } else if (*verify) {
      Session s = open_session(verify_opts, env);
      const codec::Codebook cb = load_codebook(verify_opts.codebook);
      stego::StegoConfig receiver = s.config;
      if (!receiver_config.empty()) {
        SessionOptions ro = verify_opts;
        ro.config = receiver_config;
        receiver = open_session(ro, env).config;
      }
      const stego::VerifyReport report = stego::verify_closed_loop(
          *s.provider, cb, s.config, receiver, read_file(verify_message));
      out << report.summary();
      if (!report.ok()) return kExitCodec;
    } else if (*sweep) {
      Session s = open_session(sweep_opts, env);
      const codec::Codebook cb = load_codebook(sweep_opts.codebook);
      const auto alpha_grid = parse_list<double>(alphas, "alpha");
      const auto beta_grid = parse_list<int>(betas, "beta");
      const auto messages = read_lines(read_file(messages_file));
      if (messages.empty()) throw UsageError("messages file is empty");
      metrics::SweepOptions so;
      so.threads = threads;
      so.include_timing = !no_timing;
      so.scoring_model = sweep_opts.endpoint.empty()
                             ? "ngram:" + fs::path(sweep_opts.model).filename().string()
                             : "remote:" + sweep_opts.endpoint;
      const auto cells = metrics::sweep(*s.provider, *s.scorer, cb, s.config,
                                        alpha_grid, beta_grid, messages, so);
      std::ostringstream report;
      metrics::write_jsonl(report, cells, so);
      write_atomic(report_out, report.str());
      for (const auto& c : cells) {
        out << "alpha=" << c.alpha << " beta=" << c.beta << " ok=" << c.ok
            << " capacity_exhausted=" << c.capacity_exhausted
            << " failed=" << c.failed;
        if (c.mean) out << " payload=" << c.mean->payload_pct << '%';
        out << '\n';
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityExhaustedError& e) {
    err << "capacity exhausted: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const Error& e) {
    err << "codec error: " << e.what() << '\n';
    return kExitCodec;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace rankstego::cli
