#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "cswm/commands.hpp"

namespace {

const std::map<std::string, cswm::MatrixKind> kKinds{
    {"hadamard", cswm::MatrixKind::ScrambledHadamard},
    {"smatrix", cswm::MatrixKind::ScrambledSMatrix},
};
const std::map<std::string, cswm::SparsityBasis> kBases{
    {"db4", cswm::SparsityBasis::Db4Wavelet},
    {"dct", cswm::SparsityBasis::Dct},
};
const std::map<std::string, cswm::ReconMode> kReconModes{
    {"authorized", cswm::ReconMode::Authorized},
    {"unauthorized", cswm::ReconMode::Unauthorized},
    {"eca", cswm::ReconMode::Eca},
};
const std::map<std::string, cswm::AnalyzeMode> kAnalyzeModes{
    {"capacity", cswm::AnalyzeMode::Capacity},
    {"rate", cswm::AnalyzeMode::Rate},
    {"rd", cswm::AnalyzeMode::RateDistortion},
    {"breakdown", cswm::AnalyzeMode::Breakdown},
    {"eca", cswm::AnalyzeMode::Eca},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-pixel compressive acquisition with reversible watermarking"};
    app.require_subcommand(1);

    cswm::AcquireOptions acquire;
    auto* cmd_acq = app.add_subcommand("acquire", "sense a PGM image into a measurement stream");
    cmd_acq->add_option("-i,--input", acquire.input, "input PGM (P2 or P5)")->required();
    cmd_acq->add_option("-o,--output", acquire.output, "output stream file")->required();
    cmd_acq->add_option("--kind", acquire.kind, "sensing matrix kind")
        ->transform(CLI::CheckedTransformer(kKinds));
    cmd_acq->add_option("--rate", acquire.rate, "sampling rate, fraction of the pixel count")
        ->check(CLI::Range(0.0, 1.0));
    cmd_acq->add_option("--rows", acquire.rows, "explicit measurement count (overrides --rate)");
    cmd_acq->add_option("--seed", acquire.seed, "scrambling seed");

    cswm::EmbedOptions embed;
    auto* cmd_emb = app.add_subcommand("embed", "hide part of a stream inside the rest");
    cmd_emb->add_option("-i,--input", embed.input, "original stream file")->required();
    cmd_emb->add_option("-o,--output", embed.output, "marked stream file")->required();
    cmd_emb->add_option("--key", embed.key_hex, "payload protection key, hex")->required();
    cmd_emb->add_option("--bits", embed.bits, "bits hidden per carrier, 1..16")
        ->check(CLI::Range(1, 16));
    cmd_emb->add_option("--threshold", embed.threshold,
                        "eligibility threshold; omit for the loose setting (order/2)");
    cmd_emb->add_flag("--allow-overflow", embed.allow_overflow,
                      "accept thresholds past the 16-bit-safe bound");

    cswm::ExtractOptions extract;
    auto* cmd_ext = app.add_subcommand("extract", "recover the original stream from a marked one");
    cmd_ext->add_option("-i,--input", extract.input, "marked stream file")->required();
    cmd_ext->add_option("-o,--output", extract.output, "recovered stream file")->required();
    cmd_ext->add_option("--key", extract.key_hex, "payload protection key, hex")->required();
    cmd_ext->add_option("--threshold", extract.threshold,
                        "threshold used at embed time; omit for the loose setting");

    cswm::ReconstructOptions recon;
    auto* cmd_rec = app.add_subcommand("reconstruct", "solve for the image behind a stream");
    cmd_rec->add_option("-i,--input", recon.input, "stream file")->required();
    cmd_rec->add_option("-o,--output", recon.output, "output PGM")->required();
    cmd_rec->add_option("--mode", recon.mode, "authorized, unauthorized or eca")
        ->transform(CLI::CheckedTransformer(kReconModes));
    cmd_rec->add_option("--key", recon.key_hex, "key for authorized access to a marked stream");
    cmd_rec->add_option("--threshold", recon.threshold, "embed-time threshold (authorized mode)");
    cmd_rec->add_option("--lambda", recon.lambda, "sparsity weight; omit for the default rule");
    cmd_rec->add_option("--iters", recon.iters, "solver iteration cap")->check(CLI::Range(1, 100000));
    cmd_rec->add_option("--tolerance", recon.tolerance, "relative objective tolerance");
    cmd_rec->add_option("--basis", recon.basis, "sparsity basis")
        ->transform(CLI::CheckedTransformer(kBases));

    cswm::AnalyzeOptions analyze;
    auto* cmd_ana = app.add_subcommand("analyze", "capacity models and quality sweeps (CSV)");
    cmd_ana->add_option("--what", analyze.mode, "capacity, rate, rd, breakdown or eca")
        ->required()
        ->transform(CLI::CheckedTransformer(kAnalyzeModes));
    cmd_ana->add_option("-i,--input", analyze.input,
                        "stream file (capacity, rate) or PGM (sweeps; omit for synthetic scenes)");
    cmd_ana->add_option("--marked", analyze.marked, "marked stream file (rate)");
    cmd_ana->add_option("-o,--output", analyze.output, "CSV output path; omit for stdout");
    cmd_ana->add_option("--bits", analyze.bits, "bit depths to evaluate")->delimiter(',');
    cmd_ana->add_option("--threshold", analyze.threshold, "eligibility threshold; omit for loose");
    cmd_ana->add_option("--kind", analyze.kind, "sensing matrix kind for sweeps")
        ->transform(CLI::CheckedTransformer(kKinds));
    cmd_ana->add_option("--rate", analyze.rate, "sampling rate for sweeps")
        ->check(CLI::Range(0.0, 1.0));
    cmd_ana->add_option("--seed", analyze.seed, "base seed for sweep operators");
    cmd_ana->add_option("--key", analyze.key_hex, "payload protection key for sweeps, hex");
    cmd_ana->add_option("--patches", analyze.patches, "number of patches to evaluate");
    cmd_ana->add_option("--patch-size", analyze.patch_size, "square patch side for sweeps");
    cmd_ana->add_option("--iters", analyze.iters, "solver iteration cap per patch");
    cmd_ana->add_option("--jobs", analyze.jobs, "worker threads for sweeps")
        ->check(CLI::Range(1, 256));

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_acq->parsed())
            return cswm::cmd_acquire(acquire);
        if (cmd_emb->parsed())
            return cswm::cmd_embed(embed);
        if (cmd_ext->parsed())
            return cswm::cmd_extract(extract);
        if (cmd_rec->parsed())
            return cswm::cmd_reconstruct(recon);
        if (cmd_ana->parsed())
            return cswm::cmd_analyze(analyze);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
