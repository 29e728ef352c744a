#include <iostream>

#include "CLI11.hpp"
#include "reviewnet/commands.hpp"

namespace {

using namespace reviewnet;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Women's clothing review analytics, sentiment labelling and BiLSTM classifier"};
  app.require_subcommand(1);

  std::string config_path;
  KeyValues flags;
  auto flag = [&](CLI::App* cmd, const std::string& name, const std::string& key,
                  const std::string& help) {
    return cmd->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };

  struct Command {
    const char* name;
    const char* help;
    CommandOutput (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"analyze", "Write the dataset analytics tables", cmd_analyze},
      {"label", "Add lexicon sentiment labels to the dataset", cmd_label},
      {"train", "Train the BiLSTM classifier", cmd_train},
      {"evaluate", "Score a trained model on the test split", cmd_evaluate},
      {"predict", "Classify one review text", cmd_predict},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "key = value config file");
    flag(sub, "--data", "data", "Reviews CSV");
    flag(sub, "--out", "out", "Output directory (default runs)");
    flag(sub, "--seed", "seed", "Split, initialization and shuffle seed");
    flag(sub, "--task", "task", "recommendation or sentiment")
        ->check(CLI::IsMember({"recommendation", "sentiment"}));
    flag(sub, "--embeddings", "embeddings", "GloVe text vectors");
    flag(sub, "--lexicon", "lexicon", "token<TAB>valence lexicon file");
    flag(sub, "--model", "model", "Train run directory (default: latest under --out)");
    if (std::string_view(c.name) == "predict") flag(sub, "--text", "text", "Review text");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_overrides(config, read_config_file(config_path));
    apply_overrides(config, flags);
    for (const auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      const CommandOutput out = cmd->run(config);
      std::cout << out.message << '\n';
    }
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const FingerprintMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
