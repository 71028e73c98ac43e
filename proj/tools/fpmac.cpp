// fpmac - command-line front end for the dual-precision MAC PE model.
//
// Subcommands: mac (single operation), sweep (exhaustive/random oracle
// comparison), dot (chained accumulation over a vector file), pipe
// (pipeline throughput), formats (value tables).
//
// Exit codes: 0 success, 1 sweep gate failure (--max-ulp exceeded),
// 2 malformed input or usage error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "fpmac/oracle.hpp"
#include "fpmac/pipeline.hpp"
#include "fpmac/serialize.hpp"

namespace {

using namespace fpmac;

PackedWord make_word(uint8_t bits, const MacConfig& cfg) {
  return PackedWord{bits, cfg.lanes() == 2 ? WordLayout::DualFP4 : WordLayout::SingleFP8};
}

std::string signed_hex(i128 v) {
  const bool neg = v < 0;
  u128 mag = neg ? static_cast<u128>(-v) : static_cast<u128>(v);
  char digits[40];
  int n = 0;
  do {
    digits[n++] = "0123456789ABCDEF"[static_cast<unsigned>(mag & 0xF)];
    mag >>= 4;
  } while (mag);
  std::string s = neg ? "-0x" : "+0x";
  while (n) s += digits[--n];
  return s;
}

std::string lane_value_string(uint8_t bits, const FormatSpec& spec) {
  return decimal_string(decode(bits, spec), spec);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
}

std::string flags_summary(const FpFlags& f) {
  std::string s;
  if (f.overflow) s += " overflow";
  if (f.underflow) s += " underflow";
  if (f.invalid) s += " invalid";
  if (f.inexact) s += " inexact";
  return s.empty() ? " none" : s;
}

void print_stage_trace(const MacTxn& t, const MacConfig& cfg, std::ostream& os) {
  (void)cfg;
  const auto dec = [&](const DecodedFloat& d) {
    std::ostringstream ss;
    ss << fp_class_name(d.cls) << " sign=" << int(d.sign) << " exp=" << d.exp_unbiased
       << " sig=0x" << std::hex << d.significand << std::dec;
    return ss.str();
  };
  for (unsigned ln = 0; ln < t.lanes; ++ln) {
    const LaneState& ls = t.lane[ln];
    os << "lane" << ln << ":\n";
    os << "  S0 a: " << dec(ls.a) << " | b: " << dec(ls.b) << " | c: " << dec(ls.c) << "\n";
    if (ls.special) {
      os << "  S0 special-path result: " << dec(ls.special_value)
         << (ls.invalid ? " (invalid)" : "") << "\n";
      continue;
    }
    os << "  S1 sign_p=" << int(ls.sign_p) << " sig_p=0x" << std::hex << ls.sig_p << std::dec
       << " e_p=" << ls.e_p << " e_ref=" << ls.cmp.e_ref << " shift_p=" << ls.cmp.shift_p
       << " shift_c=" << ls.cmp.shift_c << "\n";
    os << "  S2 term_p=" << signed_hex(ls.term_p.value) << " sticky=" << ls.term_p.sticky
       << " | term_c=" << signed_hex(ls.term_c.value) << " sticky=" << ls.term_c.sticky << "\n";
    os << "  S3 acc=" << signed_hex(ls.acc) << "\n";
    os << "  S4 " << dec(ls.norm) << " inexact=" << ls.inexact << "\n";
  }
}

struct MacArgs {
  std::string mode = "e4m3";
  unsigned guard = 3;
  bool relu = true;
  bool trace = false;
  std::string format = "text";
  std::string output;
  std::string a, b, c;
};

int run_mac(const MacArgs& args) {
  MacConfig cfg;
  cfg.mode = parse_mac_mode(args.mode);
  cfg.guard_bits = args.guard;
  cfg.relu = args.relu;
  const FormatSpec& spec = cfg.lane_spec();

  const PackedWord a = make_word(parse_hex_byte(args.a, 8), cfg);
  const PackedWord b = make_word(parse_hex_byte(args.b, 8), cfg);
  const PackedWord c = make_word(parse_hex_byte(args.c, 8), cfg);

  MacTxn t = stage0_decode(a, b, c, cfg);
  stage1_multiply_compare(t, cfg);
  stage2_align(t, cfg);
  stage3_accumulate(t, cfg);
  stage4_normalize(t, cfg);
  const MacResult r = stage5_output(t, cfg);

  std::ostringstream out;
  if (args.format == "json") {
    out << mac_result_json(r, cfg, a, b, c).dump(2) << "\n";
  } else {
    if (r.lanes == 2) {
      const auto [hi, lo] = unpack_dual(r.bits);
      out << "lane1=" << lane_value_string(hi, spec) << " lane0=" << lane_value_string(lo, spec)
          << " (" << hex_byte(r.bits.bits) << ")\n";
    } else {
      out << hex_byte(r.bits.bits) << " (" << lane_value_string(r.bits.bits, spec) << ")\n";
    }
    for (unsigned ln = 0; ln < r.lanes; ++ln)
      if (r.flags[ln].any()) out << "flags lane" << ln << ":" << flags_summary(r.flags[ln]) << "\n";
    if (args.trace) print_stage_trace(t, cfg, out);
  }
  write_output(args.output, out.str());
  return 0;
}

struct SweepArgs {
  std::string mode = "e4m3";
  unsigned guard = 3;
  bool relu = true;
  bool exhaustive = false;
  uint64_t random_count = 0;
  uint64_t seed = 0;
  std::optional<unsigned> max_ulp;
  unsigned threads = 0;
  uint64_t exhaustive_limit = kExhaustiveTripleLimit;
  std::string format = "json";
  std::string output;
};

int run_sweep(const SweepArgs& args) {
  MacConfig cfg;
  cfg.mode = parse_mac_mode(args.mode);
  cfg.guard_bits = args.guard;
  cfg.relu = args.relu;

  SweepDomain domain;
  if (args.exhaustive) {
    domain.kind = SweepDomain::Kind::Exhaustive;
    const uint64_t n = exhaustive_domain_size(cfg);
    if (n > args.exhaustive_limit)
      throw std::runtime_error("exhaustive domain of " + std::to_string(n) +
                               " triples exceeds the limit of " +
                               std::to_string(args.exhaustive_limit));
  } else {
    domain.kind = SweepDomain::Kind::Random;
    domain.count = args.random_count;
    domain.seed = args.seed;
  }

  const ErrorStats stats = compare_sweep(cfg, domain, args.threads);

  std::ostringstream doc;
  if (args.format == "csv")
    write_error_stats_csv(doc, stats, cfg, domain);
  else
    doc << error_stats_json(stats, cfg, domain).dump(2) << "\n";

  if (!args.output.empty()) {
    write_output(args.output, doc.str());
    std::cout << "samples=" << stats.samples << " max_ulp=" << stats.max_ulp
              << " mismatch=" << stats.mismatch_count << " -> " << args.output << "\n";
  } else {
    std::cout << doc.str();
  }

  if (args.max_ulp && stats.max_ulp > *args.max_ulp) {
    std::cerr << "sweep gate: max_ulp " << stats.max_ulp << " exceeds threshold "
              << *args.max_ulp << "\n";
    return 1;
  }
  return 0;
}

struct DotArgs {
  std::string mode = "e4m3";
  unsigned guard = 3;
  bool relu = false;  // chained accumulation; activation is opt-in here
  std::string input;
  std::string format = "text";
  std::string output;
};

int run_dot(const DotArgs& args) {
  MacConfig cfg;
  cfg.mode = parse_mac_mode(args.mode);
  cfg.guard_bits = args.guard;
  cfg.relu = args.relu;
  cfg.accumulate_chain = true;
  const FormatSpec& spec = cfg.lane_spec();

  std::ifstream in(args.input);
  if (!in) throw std::runtime_error("cannot open input file: " + args.input);
  const auto pairs = read_vector_file(in);

  // PE chain: C is the previous result word.
  PackedWord acc = make_word(0x00, cfg);
  for (const auto& [aw, bw] : pairs)
    acc = mac(make_word(aw, cfg), make_word(bw, cfg), acc, cfg).bits;

  // Oracle: the exact dot product per lane, quantized once at the end.
  const unsigned lanes = cfg.lanes();
  std::ostringstream out;
  nlohmann::json jlanes = nlohmann::json::array();
  for (unsigned ln = 0; ln < lanes; ++ln) {
    ExactValue sum = ExactValue::zero();
    for (const auto& [aw, bw] : pairs) {
      const uint8_t al = lanes == 2 ? (ln ? aw >> 4 : aw & 0xF) : aw;
      const uint8_t bl = lanes == 2 ? (ln ? bw >> 4 : bw & 0xF) : bw;
      sum = exact_add(sum, exact_mul(ExactValue::from_bits(al, spec),
                                     ExactValue::from_bits(bl, spec)));
    }
    if (cfg.relu) sum = relu_exact(sum);
    const uint8_t oracle_bits = quantize_truncate(sum, spec);
    const uint8_t pe_bits =
        lanes == 2 ? (ln ? static_cast<uint8_t>(acc.bits >> 4) : static_cast<uint8_t>(acc.bits & 0xF))
                   : acc.bits;
    const unsigned ulp = ulp_distance(pe_bits, oracle_bits, spec);
    if (args.format == "json") {
      jlanes.push_back({{"lane", ln},
                        {"result", hex_byte(pe_bits)},
                        {"result_value", lane_value_string(pe_bits, spec)},
                        {"oracle", hex_byte(oracle_bits)},
                        {"oracle_value", lane_value_string(oracle_bits, spec)},
                        {"ulp", ulp}});
    } else {
      out << "lane" << ln << ": result=" << hex_byte(pe_bits) << " ("
          << lane_value_string(pe_bits, spec) << ") oracle=" << hex_byte(oracle_bits) << " ("
          << lane_value_string(oracle_bits, spec) << ") ulp=" << ulp << "\n";
    }
  }
  if (args.format == "json") {
    nlohmann::json j = {{"version", kVersion},
                        {"kind", "dot"},
                        {"mode", std::string(mac_mode_name(cfg.mode))},
                        {"guard_bits", cfg.guard_bits},
                        {"relu", cfg.relu},
                        {"n", pairs.size()},
                        {"word", hex_byte(acc.bits)},
                        {"lanes", jlanes}};
    out << j.dump(2) << "\n";
  } else {
    const std::string body = out.str();
    out.str("");
    out << "n=" << pairs.size() << " mode=" << mac_mode_name(cfg.mode)
        << " word=" << hex_byte(acc.bits) << "\n"
        << body;
  }
  write_output(args.output, out.str());
  return 0;
}

struct PipeArgs {
  std::string mode = "e4m3";
  unsigned guard = 3;
  bool relu = true;
  uint64_t length = 0;
  uint64_t seed = 0;
  std::optional<double> freq_ghz;
  std::string trace_out;
  std::string trace_format = "csv";
  std::string format = "text";
  std::string output;
};

int run_pipe(const PipeArgs& args) {
  MacConfig cfg;
  cfg.mode = parse_mac_mode(args.mode);
  cfg.guard_bits = args.guard;
  cfg.relu = args.relu;

  std::vector<StreamInput> inputs;
  inputs.reserve(args.length);
  std::mt19937_64 rng(args.seed);
  for (uint64_t i = 0; i < args.length; ++i) {
    const uint64_t r = rng();
    inputs.push_back({make_word(static_cast<uint8_t>(r & 0xFF), cfg),
                      make_word(static_cast<uint8_t>((r >> 8) & 0xFF), cfg),
                      make_word(static_cast<uint8_t>((r >> 16) & 0xFF), cfg)});
  }

  PipelineTrace trace;
  auto [results, rep] = run_stream(inputs, cfg, args.trace_out.empty() ? nullptr : &trace);
  (void)results;

  if (!args.trace_out.empty()) {
    std::ofstream ts(args.trace_out, std::ios::binary);
    if (!ts) throw std::runtime_error("cannot open trace file: " + args.trace_out);
    if (args.trace_format == "jsonl")
      write_trace_jsonl(ts, trace);
    else
      write_trace_csv(ts, trace);
  }

  std::ostringstream out;
  if (args.format == "json") {
    out << throughput_json(rep, cfg, args.freq_ghz).dump(2) << "\n";
  } else {
    char fpc[32];
    std::snprintf(fpc, sizeof fpc, "%.6f", rep.flops_per_cycle);
    out << "mode=" << mac_mode_name(cfg.mode) << " lanes=" << rep.lanes
        << " length=" << args.length << "\n";
    out << "cycles=" << rep.cycles << " macs=" << rep.macs_retired << " flops=" << rep.flops
        << "\n";
    out << "flops_per_cycle=" << fpc << "\n";
    if (args.freq_ghz) {
      char gf[32];
      std::snprintf(gf, sizeof gf, "%.4f", rep.flops_per_cycle * *args.freq_ghz);
      out << "gflops@" << *args.freq_ghz << "GHz=" << gf << "\n";
    }
  }
  write_output(args.output, out.str());
  return 0;
}

struct FormatsArgs {
  std::string name;
  std::string format = "text";
  std::string output;
};

std::string binary_string(uint8_t bits, unsigned width) {
  std::string s = "0b";
  for (int i = static_cast<int>(width) - 1; i >= 0; --i)
    s += ((bits >> i) & 1u) ? '1' : '0';
  return s;
}

int run_formats(const FormatsArgs& args) {
  const FormatSpec& spec = format_spec(parse_format(args.name));
  const unsigned n = 1u << spec.total_bits;

  std::ostringstream out;
  if (args.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (unsigned p = 0; p < n; ++p) {
      const auto bits = static_cast<uint8_t>(p);
      const DecodedFloat d = decode(bits, spec);
      rows.push_back({{"bits", hex_byte(bits)},
                      {"binary", binary_string(bits, spec.total_bits)},
                      {"class", std::string(fp_class_name(d.cls))},
                      {"value", decimal_string(d, spec)}});
    }
    nlohmann::json j = {{"version", kVersion},
                        {"kind", "formats"},
                        {"format", std::string(format_name(spec.name))},
                        {"rows", rows}};
    out << j.dump(2) << "\n";
  } else if (args.format == "csv") {
    out << "# fpmac " << kVersion << " formats " << format_name(spec.name) << "\n";
    out << "bits,binary,class,value\n";
    for (unsigned p = 0; p < n; ++p) {
      const auto bits = static_cast<uint8_t>(p);
      const DecodedFloat d = decode(bits, spec);
      out << hex_byte(bits) << ',' << binary_string(bits, spec.total_bits) << ','
          << fp_class_name(d.cls) << ',' << decimal_string(d, spec) << "\n";
    }
  } else {
    out << "format " << format_name(spec.name) << ": " << spec.exp_bits << " exponent / "
        << spec.man_bits << " mantissa bits, bias " << spec.bias << "\n";
    for (unsigned p = 0; p < n; ++p) {
      const auto bits = static_cast<uint8_t>(p);
      const DecodedFloat d = decode(bits, spec);
      char line[96];
      std::snprintf(line, sizeof line, "%-6s %-12s %-10s %s", hex_byte(bits).c_str(),
                    binary_string(bits, spec.total_bits).c_str(),
                    std::string(fp_class_name(d.cls)).c_str(),
                    decimal_string(d, spec).c_str());
      out << line << "\n";
    }
  }
  write_output(args.output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bit-accurate dual-precision FP8/FP4 MAC processing element model"};
  app.set_version_flag("--version", std::string("fpmac ") + fpmac::kVersion);
  app.require_subcommand(1);
  int rc = 0;

  MacArgs mac_args;
  auto* cmd_mac = app.add_subcommand("mac", "evaluate one MAC: a*b + c");
  cmd_mac->add_option("a", mac_args.a, "operand A (hex word)")->required();
  cmd_mac->add_option("b", mac_args.b, "operand B (hex word)")->required();
  cmd_mac->add_option("c", mac_args.c, "addend C (hex word)")->required();
  cmd_mac->add_option("--mode", mac_args.mode, "e4m3|e5m2|dual-e2m1|dual-e1m2")
      ->capture_default_str();
  cmd_mac->add_option("--guard", mac_args.guard, "guard bits")
      ->check(CLI::Range(0u, 64u))
      ->capture_default_str();
  cmd_mac->add_flag("--relu,!--no-relu", mac_args.relu, "ReLU output stage (default on)");
  cmd_mac->add_flag("--trace", mac_args.trace, "dump per-stage intermediates");
  cmd_mac->add_option("--format", mac_args.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd_mac->add_option("-o,--output", mac_args.output, "write result to file");
  cmd_mac->callback([&] { rc = run_mac(mac_args); });

  SweepArgs sweep_args;
  auto* cmd_sweep = app.add_subcommand("sweep", "compare the PE against the exact oracle");
  cmd_sweep->add_flag("--exhaustive", sweep_args.exhaustive, "enumerate all per-lane triples");
  cmd_sweep->add_option("--random", sweep_args.random_count, "number of random word triples");
  cmd_sweep->add_option("--seed", sweep_args.seed, "random seed")->capture_default_str();
  cmd_sweep->add_option("--mode", sweep_args.mode, "e4m3|e5m2|dual-e2m1|dual-e1m2")
      ->capture_default_str();
  cmd_sweep->add_option("--guard", sweep_args.guard, "guard bits")
      ->check(CLI::Range(0u, 64u))
      ->capture_default_str();
  cmd_sweep->add_flag("--relu,!--no-relu", sweep_args.relu,
                      "apply ReLU on both PE and oracle (default on)");
  unsigned max_ulp_opt = 0;
  auto* gate = cmd_sweep->add_option("--max-ulp", max_ulp_opt,
                                     "exit nonzero if max ULP exceeds this threshold");
  cmd_sweep->add_option("--threads", sweep_args.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  cmd_sweep->add_option("--exhaustive-limit", sweep_args.exhaustive_limit, "")->group("");
  cmd_sweep->add_option("--format", sweep_args.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd_sweep->add_option("-o,--output", sweep_args.output, "write stats to file");
  cmd_sweep->callback([&] {
    if (sweep_args.exhaustive == (cmd_sweep->count("--random") > 0))
      throw CLI::ValidationError("sweep", "pass exactly one of --exhaustive / --random N");
    if (gate->count()) sweep_args.max_ulp = max_ulp_opt;
    rc = run_sweep(sweep_args);
  });

  DotArgs dot_args;
  auto* cmd_dot = app.add_subcommand("dot", "chained-accumulation dot product from a file");
  cmd_dot->add_option("-i,--input", dot_args.input, "vector file: one hex pair per line")
      ->required();
  cmd_dot->add_option("--mode", dot_args.mode, "e4m3|e5m2|dual-e2m1|dual-e1m2")
      ->capture_default_str();
  cmd_dot->add_option("--guard", dot_args.guard, "guard bits")
      ->check(CLI::Range(0u, 64u))
      ->capture_default_str();
  cmd_dot->add_flag("--relu,!--no-relu", dot_args.relu,
                    "apply ReLU at every chain step (default off)");
  cmd_dot->add_option("--format", dot_args.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd_dot->add_option("-o,--output", dot_args.output, "write result to file");
  cmd_dot->callback([&] { rc = run_dot(dot_args); });

  PipeArgs pipe_args;
  auto* cmd_pipe = app.add_subcommand("pipe", "pipeline throughput over a random stream");
  cmd_pipe->add_option("-n,--length", pipe_args.length, "stream length (MACs)")->required();
  cmd_pipe->add_option("--seed", pipe_args.seed, "random seed")->capture_default_str();
  cmd_pipe->add_option("--mode", pipe_args.mode, "e4m3|e5m2|dual-e2m1|dual-e1m2")
      ->capture_default_str();
  cmd_pipe->add_option("--guard", pipe_args.guard, "guard bits")
      ->check(CLI::Range(0u, 64u))
      ->capture_default_str();
  cmd_pipe->add_flag("--relu,!--no-relu", pipe_args.relu, "ReLU output stage (default on)");
  double freq = 0.0;
  auto* freq_opt =
      cmd_pipe->add_option("--freq", freq, "clock in GHz; scales FLOPs/cycle to GFLOPS");
  cmd_pipe->add_option("--trace-out", pipe_args.trace_out, "write per-cycle trace to file");
  cmd_pipe->add_option("--trace-format", pipe_args.trace_format, "csv|jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  cmd_pipe->add_option("--format", pipe_args.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd_pipe->add_option("-o,--output", pipe_args.output, "write report to file");
  cmd_pipe->callback([&] {
    if (freq_opt->count()) pipe_args.freq_ghz = freq;
    rc = run_pipe(pipe_args);
  });

  FormatsArgs formats_args;
  auto* cmd_formats = app.add_subcommand("formats", "print a format's full value table");
  cmd_formats->add_option("name", formats_args.name, "e4m3|e5m2|e2m1|e1m2")->required();
  cmd_formats->add_option("--format", formats_args.format, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  cmd_formats->add_option("-o,--output", formats_args.output, "write table to file");
  cmd_formats->callback([&] { rc = run_formats(formats_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
