use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use csn_ffi::*;

const PING2: &str = "@field constant [0]\n\
    MSensor = { ping = () net.forward[p, b]; net.ping[]  forward = (x, y) net.forward[x, y] }\n\
    MSink = { forward = (x, y) log_position_and_power[x, y] }\n\
    @senS position=(0,0) radius=4 battery=1000\n\
    @senX position=(3,0) radius=4 battery=100\n\
    [net.ping[], MSink] senS | [idle, MSensor] senX";

fn parse(src: &str) -> *mut CsnNetwork {
    let src = CString::new(src).unwrap();
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { csn_network_parse(src.as_ptr(), &mut net) }, CsnStatus::Ok);
    assert!(!net.is_null());
    net
}

fn last_error() -> String {
    let e = csn_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_string_lossy().into_owned()
}

#[test]
fn parse_run_and_inspect() {
    let net = parse(PING2);
    unsafe {
        assert_eq!(csn_network_sensor_count(net), 2);
        let mut total = 0;
        assert_eq!(csn_network_total_battery_micros(net, &mut total), CsnStatus::Ok);
        assert_eq!(total, 1_100_000_000);

        let mut opts = csn_run_options_default();
        opts.seed = 3;
        let mut trace = ptr::null_mut();
        assert_eq!(csn_run(net, &opts, &mut trace), CsnStatus::Ok);
        assert!(csn_trace_step_count(trace) > 0);
        assert_eq!(CStr::from_ptr(csn_trace_outcome(trace)).to_str().unwrap(), "QuiescentBlocked");
        assert_eq!(csn_trace_log_count(trace), 1);

        let mut spent = 0;
        assert_eq!(csn_trace_energy_spent_micros(trace, &mut spent), CsnStatus::Ok);
        let mut last = ptr::null_mut();
        assert_eq!(csn_trace_final_network(trace, &mut last), CsnStatus::Ok);
        let mut after = 0;
        assert_eq!(csn_network_total_battery_micros(last, &mut after), CsnStatus::Ok);
        assert_eq!(total - after, spent);

        let text = csn_trace_render(trace);
        let rendered = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert!(rendered.ends_with("outcome QuiescentBlocked\n"));
        csn_string_free(text);

        csn_network_free(last);
        csn_trace_free(trace);
        csn_network_free(net);
    }
}

#[test]
fn congruence_and_hash() {
    let a = parse("@field constant [0]\n@u position=(0,0) radius=1 battery=500\n@v position=(4,0) radius=1 battery=500\n[this.a[] | idle, {}] u | [idle, {}] v");
    let b = parse("@field constant [0]\n@v position=(4,0) radius=1 battery=500\n@u position=(0,0) radius=1 battery=500\n[idle, {}] v | [this.a[], {}] u");
    let opts = csn_run_options_default();
    unsafe {
        let mut same = false;
        assert_eq!(csn_network_congruent(a, b, &opts, &mut same), CsnStatus::Ok);
        assert!(same);
        let (mut ha, mut hb) = (0, 0);
        assert_eq!(csn_network_hash(a, &opts, &mut ha), CsnStatus::Ok);
        assert_eq!(csn_network_hash(b, &opts, &mut hb), CsnStatus::Ok);
        assert_eq!(ha, hb);
        let text = csn_network_canonical(a, &opts);
        let canon = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert!(canon.contains("this.a"), "{canon}");
        csn_string_free(text);
        csn_network_free(a);
        csn_network_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut net = ptr::null_mut();
        let bad = CString::new("@field constant [0]\n[(this.a[] | this.c[]); idle, {}] s").unwrap();
        assert_eq!(csn_network_parse(bad.as_ptr(), &mut net), CsnStatus::Parse);
        assert!(net.is_null());
        assert!(last_error().contains("2:2"));

        assert_eq!(csn_network_parse(ptr::null(), &mut net), CsnStatus::NullArgument);
        let invalid = [0xffu8, 0];
        assert_eq!(csn_network_parse(invalid.as_ptr().cast(), &mut net), CsnStatus::InvalidUtf8);

        let missing = CString::new("/nonexistent/net.csn").unwrap();
        assert_eq!(csn_network_parse_file(missing.as_ptr(), &mut net), CsnStatus::Io);

        let good = parse(PING2);
        let mut opts = csn_run_options_default();
        opts.c_in_micros = 0;
        let mut trace = ptr::null_mut();
        assert_eq!(csn_run(good, &opts, &mut trace), CsnStatus::Config);
        assert!(last_error().contains("positive"));
        opts = csn_run_options_default();
        opts.max_steps = 0;
        assert_eq!(csn_run(good, &opts, &mut trace), CsnStatus::Config);
        assert!(trace.is_null());
        assert!(csn_trace_outcome(ptr::null()).is_null());
        assert_eq!(csn_network_sensor_count(ptr::null()), 0);
        csn_network_free(good);
        csn_network_free(ptr::null_mut());
        csn_trace_free(ptr::null_mut());
        csn_string_free(ptr::null_mut());
    }
}

#[test]
fn parse_file_reads_the_bundled_corpus() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/querying.csn");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut net = ptr::null_mut();
    unsafe {
        assert_eq!(csn_network_parse_file(path.as_ptr(), &mut net), CsnStatus::Ok);
        assert_eq!(csn_network_sensor_count(net), 4);
        csn_network_free(net);
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/csn.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in ["csn_network_parse", "csn_run", "csn_last_error", "CSN_STATUS_OK", "CsnRunOptions"] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let tmp = std::env::temp_dir().join(format!("csn_header_check_{}.c", std::process::id()));
    std::fs::write(
        &tmp,
        "#include \"csn.h\"\nint main(void) { CsnRunOptions o = csn_run_options_default(); CsnNetwork *n = 0;\n\
         return csn_network_parse(\"\", &n) == CSN_STATUS_OK && o.max_steps > 0; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&tmp)
        .status();
    let _ = std::fs::remove_file(&tmp);
    match status {
        Ok(s) => assert!(s.success(), "the header does not compile"),
        Err(e) => panic!("no C compiler available: {e}"),
    }
}
