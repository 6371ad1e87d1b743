use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let header = match cbindgen::generate_with_config(&crate_dir, config) {
        Ok(h) => h,
        Err(e) => {
            // A parse failure here is also a compile error in lib.rs; let rustc report it.
            println!("cargo:warning=header not regenerated: {e}");
            return;
        }
    };
    // write_to_file skips the write when the content is unchanged.
    header.write_to_file(crate_dir.join("include/hmf.h"));
}
