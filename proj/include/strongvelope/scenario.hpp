// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented scenario scripts driving a Simulation. One statement per
// line, '#' starts a comment:
//
//   seed <hex>                         default RNG seed (CLI --seed overrides)
//   policy rotate|resend|batch <n>     rotation constants
//   participant <name> [<handle hex>]  declare an identity
//   start <name>...                    initial composition, all join the room
//   send <name> <text...>              send a payload
//   send-many <name> <count>           send <count> numbered payloads
//   blind-send <name>                  send without payload
//   include <actor> <name>...          queue inclusion at <actor>
//   exclude <actor> <name>...          queue exclusion at <actor>
//   join <name> / leave <name>         room (channel) membership only
//   seed-history <name>                resume <name> from room history
//   advance <seconds>                  move the simulated clock
//   expect-type <MESSAGE_TYPE>         type of the last posted message
//   expect-decrypt <name>...           decrypted the last message correctly
//   expect-missing-key <name>...       last message references an unknown key
//   expect-no-plaintext <name>...      got no plaintext for the last message
//   expect-seeded <name> yes|no        outcome of the last seed-history
//   expect-all-decrypted               every delivery since start decrypted,
//                                      except blind and unaddressed ones

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "strongvelope/errors.hpp"
#include "strongvelope/key_store.hpp"

namespace strongvelope {

/// Malformed script; distinct from a failed expectation.
class ScriptError : public Error
{
public:
    ScriptError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ScenarioStep
{
    std::size_t line = 0;
    std::string verb;
    std::vector<std::string> args;
    std::string rest; // raw text after the first argument, for payloads
};

struct ScenarioScript
{
    struct Declared
    {
        std::string name;
        std::optional<Bytes> handle;
    };

    std::optional<Bytes> seed;
    RotationPolicy policy;
    std::vector<Declared> participants;
    std::vector<ScenarioStep> steps;

    /// Throws ScriptError for unknown verbs, bad arity, malformed numbers
    /// or hex, and references to undeclared participants.
    static ScenarioScript parse(std::istream& in);
    static ScenarioScript parse_file(const std::string& path);
};

struct ScenarioReport
{
    bool passed = true;
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::vector<std::string> lines;
    std::string log; // room log, one "<seq> <sender> <wire>" line per message
};

inline const Bytes kDefaultScenarioSeed{'s', 't', 'r', 'o', 'n', 'g', 'v', 'e', 'l', 'o', 'p', 'e'};

/// Executes the script. Expectation failures are recorded and execution
/// continues; an exception from an action step ends the run as failed.
ScenarioReport run_scenario(const ScenarioScript& script, const std::optional<Bytes>& seed_override = std::nullopt);

} // namespace strongvelope
