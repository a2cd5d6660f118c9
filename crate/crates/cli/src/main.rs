use anyhow::{Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use microdyn_bench::{run_suite, BenchError, BenchmarkSpec, SuiteOptions};
use microdyn_core::elf::{self, machine_name};
use microdyn_core::host::{self, runtime, HostError, RunOptions, ToolchainProfile};
use microdyn_core::refinterp::{interpret_str, InterpOptions};
use microdyn_core::{compile_source, CodegenConfig, CompileError, CompiledProgram, DispatchMode, SourceProgram};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

/// MiniPy to C99 compiler for a frame/display abstract machine.
#[derive(Parser)]
#[command(name = "microdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit C translation units for a MiniPy program.
    Compile(CompileArgs),
    /// Compile and build the kernel executable and loadable objects.
    Build(BuildArgs),
    /// Compile, build and run a program, serving its load requests.
    Run(RunArgs),
    /// Run a program on the reference interpreter.
    Interp(InterpArgs),
    /// Run a benchmark suite described by a TOML file.
    Bench(BenchArgs),
    /// List the sections and function symbols of an ELF object.
    ElfDump(ElfDumpArgs),
}

#[derive(Clone, Copy, Debug)]
enum LexLevels {
    Auto,
    Fixed(usize),
}

impl FromStr for LexLevels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(LexLevels::Auto),
            n => n.parse().map(LexLevels::Fixed).map_err(|_| format!("expected a positive integer or `auto`, got `{n}`")),
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    file: PathBuf,
    /// Output directory (default: $MICRODYN_WORKDIR, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    dispatch: DispatchMode,
    /// Also write the dynamic symbol table.
    #[arg(long)]
    emit_symtab: bool,
    #[arg(long, default_value = "auto")]
    max_lex_levels: LexLevels,
    /// Kernel base name (default: the file stem).
    #[arg(long)]
    kernel: Option<String>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    compile: CompileArgs,
    /// Toolchain profile (TOML).
    #[arg(long)]
    toolchain: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Kill the kernel after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Print the session log as JSON lines on stderr.
    #[arg(long)]
    events: bool,
    /// Ask the runtime to report heap usage around loads and deletes.
    #[arg(long)]
    trace_heap: bool,
}

#[derive(Args)]
struct InterpArgs {
    file: PathBuf,
    /// Decides which functions count as loaded.
    #[arg(long, default_value = "auto")]
    dispatch: DispatchMode,
    /// Print the functions that would be loaded on stderr.
    #[arg(long)]
    show_loads: bool,
}

#[derive(Args)]
struct BenchArgs {
    spec: PathBuf,
    /// Directory for build artifacts and `bench.csv` / `bench.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    toolchain: Option<PathBuf>,
}

#[derive(Args)]
struct ElfDumpArgs {
    object: PathBuf,
}

/// Failure caused by the input rather than by this tool.
#[derive(Debug)]
struct UserError(String);

impl fmt::Display for UserError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

fn user(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

fn exit_status(err: &anyhow::Error) -> u8 {
    let is_user = err.chain().any(|e| {
        e.is::<UserError>()
            || e.is::<CompileError>()
            || e.is::<elf::ElfError>()
            || matches!(e.downcast_ref::<HostError>(), Some(HostError::Config(_) | HostError::Timeout { .. }))
            || matches!(
                e.downcast_ref::<BenchError>(),
                Some(BenchError::Spec(_) | BenchError::Io { .. } | BenchError::Compile(_) | BenchError::Variance { .. })
            )
    });
    if is_user {
        1
    } else {
        2
    }
}

fn read_source(path: &Path) -> Result<SourceProgram> {
    SourceProgram::from_file(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => user(format!("{}: no such file", path.display())),
        _ => user(format!("{}: {e}", path.display())),
    })
}

fn out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone()
        .or_else(|| std::env::var_os("MICRODYN_WORKDIR").filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn kernel_name(args: &CompileArgs) -> String {
    if let Some(k) = &args.kernel {
        return k.clone();
    }
    let stem = args.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name: String = stem.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    if !name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        name.insert(0, '_');
    }
    name
}

fn compile(args: &CompileArgs) -> Result<CompiledProgram> {
    let src = read_source(&args.file)?;
    let cfg = CodegenConfig {
        max_lex_levels: match args.max_lex_levels {
            LexLevels::Auto => None,
            LexLevels::Fixed(n) => Some(n),
        },
        ..CodegenConfig::new(kernel_name(args), args.dispatch)
    };
    compile_source(&src, &cfg).map_err(|e| anyhow::Error::new(e).context(format!("{}", args.file.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_compile(args: &CompileArgs) -> Result<()> {
    let program = compile(args)?;
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for unit in program.units() {
        let p = dir.join(&unit.file_name);
        write(&p, &unit.body)?;
        println!("{}", p.display());
    }
    write(&dir.join(runtime::HEADER_NAME), runtime::HEADER)?;
    if args.emit_symtab {
        let p = dir.join(program.symtab_file_name());
        write(&p, &program.symtab.to_text())?;
        println!("{}", p.display());
    }
    Ok(())
}

fn toolchain(path: &Option<PathBuf>) -> Result<ToolchainProfile> {
    Ok(ToolchainProfile::load(path.as_deref())?)
}

fn build(args: &BuildArgs) -> Result<host::BuiltKernel> {
    let program = compile(&args.compile)?;
    let tc = toolchain(&args.toolchain)?;
    let dir = args.compile.out.clone().or_else(|| tc.workdir.clone()).unwrap_or_else(|| out_dir(&None));
    Ok(host::build_kernel(&program, &dir, &tc)?)
}

fn cmd_build(args: &BuildArgs) -> Result<()> {
    let k = build(args)?;
    let s = host::sizes(&k)?;
    println!("executable {} ({} resident bytes)", k.executable.display(), s.resident_bytes);
    for ((name, bytes), obj) in s.dynamic.iter().zip(&k.dynamic_objects) {
        println!("loadable {name} {} ({bytes} bytes)", obj.path.display());
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let k = build(&args.build)?;
    let mut opts = RunOptions { timeout: args.timeout.map(Duration::from_secs_f64), ..Default::default() };
    if args.trace_heap {
        opts.env.push(("OLY_TRACE_HEAP".into(), "1".into()));
    }
    let report = host::run_kernel(&k, &opts)?;
    print!("{}", report.output);
    eprint!("{}", report.stderr);
    if args.events {
        eprint!("{}", report.events_json_lines());
    }
    if report.status != 0 {
        return Err(user(format!("kernel exited with status {}", report.status)));
    }
    Ok(())
}

fn cmd_interp(args: &InterpArgs) -> Result<()> {
    let src = read_source(&args.file)?;
    let r = interpret_str(src.body(), &InterpOptions { mode: args.dispatch, ..Default::default() })
        .map_err(|e| anyhow::Error::new(CompileError::from(e)).context(format!("{}", args.file.display())))?;
    print!("{}", r.output);
    if args.show_loads {
        for l in &r.loads {
            eprintln!("load {l}");
        }
    }
    match r.error {
        Some(e) => {
            eprintln!("oly: {}", e.name());
            Err(user(e.to_string()))
        }
        None => Ok(()),
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if !args.spec.exists() {
        return Err(user(format!("{}: no such file", args.spec.display())));
    }
    let spec = BenchmarkSpec::from_file(&args.spec)?;
    let out = out_dir(&args.out);
    let opts = SuiteOptions {
        toolchain: toolchain(&args.toolchain)?,
        workdir: Some(out.join("build")),
        report_dir: Some(out.clone()),
        ..Default::default()
    };
    let result = run_suite(&spec, &opts)?;
    print!("{}", result.to_table());
    println!("wrote {}", out.join("bench.csv").display());
    Ok(())
}

fn cmd_elf_dump(args: &ElfDumpArgs) -> Result<()> {
    let bytes = std::fs::read(&args.object).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => user(format!("{}: no such file", args.object.display())),
        _ => user(format!("{}: {e}", args.object.display())),
    })?;
    let img = elf::parse_any(&bytes).with_context(|| format!("{}", args.object.display()))?;
    println!("machine {} ({})", img.machine, machine_name(img.machine));
    println!("sections:");
    for s in img.sections.iter().filter(|s| !s.name.is_empty()) {
        println!("  {:<24} type {:>2} size {:>8}{}", s.name, s.sh_type, s.size, if s.is_alloc() { " alloc" } else { "" });
    }
    println!("functions:");
    for f in img.function_symbols() {
        println!("  {:<24} value {:#08x} size {:>6}", f.name, f.value, f.size);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    let outcome = match &cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Build(a) => cmd_build(a),
        Command::Run(a) => cmd_run(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ElfDump(a) => cmd_elf_dump(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("microdyn: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
