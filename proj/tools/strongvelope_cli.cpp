// SPDX-License-Identifier: Apache-2.0
//
// strongvelope keygen [--seed HEX]
// strongvelope dissect <hex|@file> [--pubkey HEX]
// strongvelope scenario <path> [--seed HEX] [--log FILE]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "strongvelope/crypto.hpp"
#include "strongvelope/dissect.hpp"
#include "strongvelope/random.hpp"
#include "strongvelope/scenario.hpp"

namespace sv = strongvelope;

namespace {

constexpr int kUsageError = 2;

int cmd_keygen(const std::optional<std::string>& seed_hex)
{
    sv::SystemRandom system;
    std::optional<sv::DeterministicRandom> seeded;
    sv::RandomSource* rng = &system;
    if (seed_hex) {
        seeded.emplace(sv::from_hex(*seed_hex));
        rng = &*seeded;
    }
    const auto sign = sv::SignKeyPair::generate(*rng);
    const auto dh = sv::DhKeyPair::generate(*rng);
    std::cout << "ed25519 secret seed: " << sign.secret_seed.hex() << '\n'
              << "ed25519 public key:  " << sign.public_key.hex() << '\n'
              << "x25519 secret:       " << dh.secret_scalar.hex() << '\n'
              << "x25519 public key:   " << dh.public_point.hex() << '\n';
    return 0;
}

int cmd_dissect(const std::string& input, const std::optional<std::string>& pubkey_hex)
{
    std::string text = input;
    if (!input.empty() && input.front() == '@') {
        std::ifstream in(input.substr(1));
        if (!in) {
            std::cerr << "error: cannot open " << input.substr(1) << '\n';
            return kUsageError;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    const sv::Bytes wire = sv::from_hex(text);
    std::optional<sv::SignPublicKey> signer;
    if (pubkey_hex) {
        signer = sv::SignPublicKey::from_hex(*pubkey_hex);
    }
    const auto report = sv::dissect(wire, signer);
    std::cout << report.text;
    return report.ok() ? 0 : 1;
}

int cmd_scenario(const std::string& path, const std::optional<std::string>& seed_hex,
                 const std::optional<std::string>& log_path)
{
    sv::ScenarioScript script;
    try {
        script = sv::ScenarioScript::parse_file(path);
    } catch (const sv::ScriptError& e) {
        std::cerr << "script error: " << path << ": " << e.what() << '\n';
        return kUsageError;
    }
    std::optional<sv::Bytes> seed;
    if (seed_hex) {
        seed = sv::from_hex(*seed_hex);
    }
    const auto report = sv::run_scenario(script, seed);
    for (const auto& line : report.lines) {
        std::cout << line << '\n';
    }
    if (log_path) {
        std::ofstream out(*log_path);
        out << report.log;
    }
    std::cout << "scenario " << path << ": " << (report.passed ? "PASS" : "FAIL") << " (" << report.checks
              << " checks, " << report.failures << " failures)\n";
    return report.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Strongvelope protocol tooling: key generation, wire dissection, scripted scenarios"};
    app.require_subcommand(1);

    std::optional<std::string> keygen_seed;
    auto* keygen = app.add_subcommand("keygen", "Generate Ed25519 and Curve25519 key pairs");
    keygen->add_option("--seed", keygen_seed, "Hex seed for deterministic output");

    std::string dissect_input;
    std::optional<std::string> dissect_pubkey;
    auto* dis = app.add_subcommand("dissect", "Break a wire message into its records");
    dis->add_option("wire", dissect_input, "Message as hex, or @file containing hex")->required();
    dis->add_option("--pubkey", dissect_pubkey, "Sender Ed25519 public key (hex) to check the signature");

    std::string scenario_path;
    std::optional<std::string> scenario_seed, scenario_log;
    auto* scen = app.add_subcommand("scenario", "Run a scripted multi-party scenario");
    scen->add_option("path", scenario_path, "Scenario script")->required();
    scen->add_option("--seed", scenario_seed, "Hex RNG seed (overrides the script)");
    scen->add_option("--log", scenario_log, "Write the room log (seq sender wire, hex) to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) {
            return cmd_keygen(keygen_seed);
        }
        if (*dis) {
            return cmd_dissect(dissect_input, dissect_pubkey);
        }
        return cmd_scenario(scenario_path, scenario_seed, scenario_log);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
