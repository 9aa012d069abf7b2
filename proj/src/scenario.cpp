// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/scenario.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "strongvelope/simulation.hpp"

namespace strongvelope {

namespace {

struct VerbShape
{
    std::size_t min_args;
    std::size_t max_args; // SIZE_MAX: unbounded
    std::size_t participant_args; // leading args that name participants; SIZE_MAX: all
};

constexpr std::size_t kMany = static_cast<std::size_t>(-1);

const std::map<std::string, VerbShape, std::less<>>& step_verbs()
{
    static const std::map<std::string, VerbShape, std::less<>> verbs{
        {"start", {1, kMany, kMany}},
        {"send", {2, kMany, 1}},
        {"send-many", {2, 2, 1}},
        {"blind-send", {1, 1, 1}},
        {"include", {2, kMany, kMany}},
        {"exclude", {2, kMany, kMany}},
        {"join", {1, 1, 1}},
        {"leave", {1, 1, 1}},
        {"seed-history", {1, 1, 1}},
        {"advance", {1, 1, 0}},
        {"expect-type", {1, 1, 0}},
        {"expect-decrypt", {1, kMany, kMany}},
        {"expect-missing-key", {1, kMany, kMany}},
        {"expect-no-plaintext", {1, kMany, kMany}},
        {"expect-seeded", {2, 2, 1}},
        {"expect-all-decrypted", {1, kMany, kMany}},
    };
    return verbs;
}

std::uint64_t parse_count(const std::string& text, std::size_t line)
{
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ScriptError(line, "expected a non-negative integer, got '" + text + "'");
    }
    return value;
}

Bytes parse_hex(const std::string& text, std::size_t line)
{
    try {
        return from_hex(text);
    } catch (const std::invalid_argument& e) {
        throw ScriptError(line, std::string("bad hex: ") + e.what());
    }
}

// Text after the first `skip` whitespace-separated words.
std::string rest_after(const std::string& line, std::size_t skip)
{
    std::size_t pos = 0;
    for (std::size_t i = 0; i < skip; ++i) {
        pos = line.find_first_not_of(" \t", pos);
        pos = line.find_first_of(" \t", pos);
        if (pos == std::string::npos) {
            return {};
        }
    }
    pos = line.find_first_not_of(" \t", pos);
    if (pos == std::string::npos) {
        return {};
    }
    auto end = line.find_last_not_of(" \t\r");
    return line.substr(pos, end - pos + 1);
}

} // namespace

ScenarioScript ScenarioScript::parse(std::istream& in)
{
    ScenarioScript script;
    std::set<std::string> declared;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream words(line);
        std::vector<std::string> tokens;
        for (std::string w; words >> w;) {
            tokens.push_back(w);
        }
        if (tokens.empty()) {
            continue;
        }
        const std::string verb = tokens.front();
        std::vector<std::string> args(tokens.begin() + 1, tokens.end());

        if (verb == "seed") {
            if (args.size() != 1) {
                throw ScriptError(line_no, "usage: seed <hex>");
            }
            script.seed = parse_hex(args[0], line_no);
            continue;
        }
        if (verb == "policy") {
            if (args.size() != 2) {
                throw ScriptError(line_no, "usage: policy rotate|resend|batch <n>");
            }
            const auto n = parse_count(args[1], line_no);
            if (n == 0 || n > 0xFFFFFFFFu) {
                throw ScriptError(line_no, "policy counts must be between 1 and 2^32-1");
            }
            const auto v = static_cast<std::uint32_t>(n);
            if (args[0] == "rotate") {
                script.policy.rotate_after_sent = v;
            } else if (args[0] == "resend") {
                script.policy.resend_after_total = v;
            } else if (args[0] == "batch") {
                script.policy.history_batch = v;
            } else {
                throw ScriptError(line_no, "unknown policy '" + args[0] + "'");
            }
            continue;
        }
        if (verb == "participant") {
            if (args.empty() || args.size() > 2) {
                throw ScriptError(line_no, "usage: participant <name> [<handle hex>]");
            }
            if (!declared.insert(args[0]).second) {
                throw ScriptError(line_no, "participant '" + args[0] + "' declared twice");
            }
            Declared d{args[0], std::nullopt};
            if (args.size() == 2) {
                d.handle = parse_hex(args[1], line_no);
                if (d.handle->size() != ParticipantId::kSize) {
                    throw ScriptError(line_no, "handles are 8 bytes");
                }
            }
            script.participants.push_back(std::move(d));
            continue;
        }

        auto it = step_verbs().find(verb);
        if (it == step_verbs().end()) {
            throw ScriptError(line_no, "unknown statement '" + verb + "'");
        }
        const VerbShape& shape = it->second;
        if (args.size() < shape.min_args || (shape.max_args != kMany && args.size() > shape.max_args)) {
            throw ScriptError(line_no, "wrong number of arguments for '" + verb + "'");
        }
        const std::size_t named = std::min(shape.participant_args, args.size());
        for (std::size_t i = 0; i < named; ++i) {
            if (!declared.contains(args[i])) {
                throw ScriptError(line_no, "undeclared participant '" + args[i] + "'");
            }
        }
        if (verb == "send-many" || verb == "advance") {
            parse_count(args.back(), line_no);
        }
        if (verb == "expect-type" && !message_type_from_name(args[0])) {
            throw ScriptError(line_no, "unknown message type '" + args[0] + "'");
        }
        if (verb == "expect-seeded" && args[1] != "yes" && args[1] != "no") {
            throw ScriptError(line_no, "expect-seeded takes yes or no");
        }
        script.steps.push_back({line_no, verb, std::move(args), rest_after(line, 2)});
    }
    return script;
}

ScenarioScript ScenarioScript::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScriptError(0, "cannot open " + path);
    }
    return parse(in);
}

namespace {

class Runner
{
public:
    Runner(const ScenarioScript& script, const Bytes& seed) : script_(script), sim_(seed, script.policy) {}

    ScenarioReport run()
    {
        for (const auto& d : script_.participants) {
            std::optional<ParticipantId> handle;
            if (d.handle) {
                handle = ParticipantId::from_view(*d.handle);
            }
            sim_.declare(d.name, handle);
        }
        for (const auto& step : script_.steps) {
            try {
                execute(step);
            } catch (const std::exception& e) {
                report_.lines.push_back("ERROR line " + std::to_string(step.line) + " (" + step.verb + "): " + e.what());
                report_.passed = false;
                ++report_.failures;
                break;
            }
        }
        std::ostringstream log;
        sim_.room().write_log(log);
        report_.log = log.str();
        return std::move(report_);
    }

private:
    void check(const ScenarioStep& step, bool ok, const std::string& detail)
    {
        ++report_.checks;
        std::string line = (ok ? "ok   line " : "FAIL line ") + std::to_string(step.line) + ": " + step.verb;
        for (const auto& a : step.args) {
            line += " " + a;
        }
        if (!ok && !detail.empty()) {
            line += " -- " + detail;
        }
        report_.lines.push_back(std::move(line));
        if (!ok) {
            report_.passed = false;
            ++report_.failures;
        }
    }

    std::uint64_t last_seq(const ScenarioStep& step) const
    {
        auto seq = sim_.last_seq();
        if (!seq) {
            throw ScriptError(step.line, "no message has been sent yet");
        }
        return *seq;
    }

    std::string describe(const Delivery* d) const
    {
        if (d == nullptr) {
            return "not delivered";
        }
        if (!d->result) {
            return "error: " + d->error;
        }
        return std::string(inbound_status_name(d->result->status));
    }

    void execute(const ScenarioStep& step)
    {
        const auto& v = step.verb;
        const auto& a = step.args;
        if (v == "start") {
            sim_.start(a);
        } else if (v == "send") {
            const std::string text = step.rest;
            sim_.send(a[0], Bytes(text.begin(), text.end()));
        } else if (v == "send-many") {
            const auto count = parse_count(a[1], step.line);
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::string text = a[0] + " message " + std::to_string(++counter_);
                sim_.send(a[0], Bytes(text.begin(), text.end()));
            }
        } else if (v == "blind-send") {
            sim_.send(a[0], std::nullopt);
        } else if (v == "include") {
            sim_.include(a[0], {a.begin() + 1, a.end()});
        } else if (v == "exclude") {
            sim_.exclude(a[0], {a.begin() + 1, a.end()});
        } else if (v == "join") {
            sim_.join_room(a[0]);
        } else if (v == "leave") {
            sim_.leave_room(a[0]);
        } else if (v == "seed-history") {
            seeded_[a[0]] = sim_.resume(a[0]).own_key_found;
        } else if (v == "advance") {
            sim_.advance(static_cast<std::int64_t>(parse_count(a[0], step.line)));
        } else if (v == "expect-type") {
            const auto& sent = sim_.sent(last_seq(step));
            check(step, message_type_name(sent.message.type) == a[0],
                  "was " + std::string(message_type_name(sent.message.type)));
        } else if (v == "expect-decrypt") {
            const auto seq = last_seq(step);
            const auto& sent = sim_.sent(seq);
            for (const auto& name : a) {
                const Delivery* d = sim_.delivery(name, seq);
                const bool ok = d && d->decrypted() && sent.payload && d->result->payload == sent.payload;
                check(step, ok, name + ": " + describe(d));
            }
        } else if (v == "expect-missing-key") {
            const auto seq = last_seq(step);
            for (const auto& name : a) {
                const Delivery* d = sim_.delivery(name, seq);
                check(step, d && d->result && d->result->status == InboundStatus::MissingKey,
                      name + ": " + describe(d));
            }
        } else if (v == "expect-no-plaintext") {
            const auto seq = last_seq(step);
            for (const auto& name : a) {
                const Delivery* d = sim_.delivery(name, seq);
                check(step, !(d && d->result && d->result->payload), name + ": " + describe(d));
            }
        } else if (v == "expect-seeded") {
            auto it = seeded_.find(a[0]);
            if (it == seeded_.end()) {
                throw ScriptError(step.line, "no seed-history for '" + a[0] + "' yet");
            }
            check(step, it->second == (a[1] == "yes"), std::string("own key found: ") + (it->second ? "yes" : "no"));
        } else if (v == "expect-all-decrypted") {
            const auto last = sim_.last_seq();
            for (const auto& name : a) {
                std::size_t bad = 0, seen = 0;
                std::string first_problem;
                for (std::uint64_t seq = 0; last && seq <= *last; ++seq) {
                    const auto& sent = sim_.sent(seq);
                    const Delivery* d = sim_.delivery(name, seq);
                    if (d == nullptr || !sent.payload) {
                        continue;
                    }
                    ++seen;
                    if (!d->decrypted() || d->result->payload != sent.payload) {
                        if (bad++ == 0) {
                            first_problem = "seq " + std::to_string(seq) + " " + describe(d);
                        }
                    }
                }
                check(step, bad == 0,
                      name + ": " + std::to_string(bad) + " of " + std::to_string(seen) + " failed, first " +
                          first_problem);
            }
        }
    }

    const ScenarioScript& script_;
    Simulation sim_;
    ScenarioReport report_;
    std::map<std::string, bool> seeded_;
    std::uint64_t counter_ = 0;
};

} // namespace

ScenarioReport run_scenario(const ScenarioScript& script, const std::optional<Bytes>& seed_override)
{
    const Bytes seed = seed_override ? *seed_override : script.seed.value_or(kDefaultScenarioSeed);
    return Runner(script, seed).run();
}

} // namespace strongvelope
