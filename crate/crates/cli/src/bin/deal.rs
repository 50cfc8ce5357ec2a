use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tcs_schemes::groups::rsa::RsaBits;
use tcs_schemes::{DealOptions, SchemeId};
use tcs_service::{deal_to_dir, parse_seed, DealSpec, ServiceError};

/// Trusted dealer: writes one public key file and one share file per party.
#[derive(Parser)]
#[command(name = "deal", version)]
struct Args {
    #[arg(long)]
    scheme: SchemeId,
    #[arg(long)]
    n: u16,
    #[arg(long)]
    t: u16,
    #[arg(long)]
    out: PathBuf,
    /// Hex. 32 bytes are used as the seed directly; other lengths are hashed.
    #[arg(long)]
    seed: String,
    /// Key name; defaults to the lower-case scheme name.
    #[arg(long)]
    key_id: Option<String>,
    /// RSA modulus size for SH00.
    #[arg(long, default_value_t = 2048)]
    rsa_bits: u32,
    /// Use a 512-bit RSA modulus. Not secure.
    #[arg(long)]
    insecure_test_modulus: bool,
    /// Also write per-party MAC keys for authenticated channels.
    #[arg(long)]
    auth: bool,
}

fn run(args: Args) -> Result<(), ServiceError> {
    let options = if args.insecure_test_modulus {
        DealOptions::test()
    } else {
        DealOptions {
            rsa_bits: RsaBits::from_bits(args.rsa_bits)?,
            allow_test_modulus: false,
        }
    };
    let spec = DealSpec {
        scheme: args.scheme,
        n: args.n,
        t: args.t,
        seed: parse_seed(&args.seed)?,
        key_id: args.key_id,
        options,
        auth: args.auth,
    };
    for f in deal_to_dir(&spec, &args.out)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    tcs_cli::init_logging();
    tcs_cli::finish(run(Args::parse()))
}
