use microdyn_core::host::runtime;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn build(dir: &Path, harness: &str) -> PathBuf {
    std::fs::write(dir.join(runtime::HEADER_NAME), runtime::HEADER).unwrap();
    std::fs::write(dir.join(runtime::SOURCE_NAME), runtime::SOURCE).unwrap();
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/c").join(format!("{harness}.c"));
    let exe = dir.join(harness);
    let out = Command::new("gcc")
        .args(["-std=c99", "-O1", "-Wall", "-fwrapv", "-I"])
        .arg(dir)
        .arg(&src)
        .arg(dir.join(runtime::SOURCE_NAME))
        .arg("-o")
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    exe
}

fn run_seeds(harness: &str, seeds: std::ops::Range<u64>) {
    let dir = tempfile::tempdir().unwrap();
    let exe = build(dir.path(), harness);
    for seed in seeds {
        let out = Command::new(&exe).arg(seed.to_string()).output().unwrap();
        assert!(out.status.success(), "{harness} seed {seed}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
    }
}

/// Random alloc/free against a shadow of live blocks: no overlap, contents
/// intact, accounting consistent, and full coalescing at the end.
#[test]
fn heap_matches_shadow_model() {
    run_seeds("heap_model", 0..8);
}

/// Calls through closures whose static chain differs from the display,
/// with random recursion up to 64 frames deep, leave the display, frame
/// cursor and heap as they were.
#[test]
fn display_is_restored_after_calls() {
    run_seeds("display", 0..8);
}

const HDR: usize = 16;
const MIN: usize = 16;

#[derive(Clone, Copy, Debug)]
struct Block {
    off: usize,
    size: usize,
    free: bool,
}

/// Reference first-fit allocator over an explicit block list: requests
/// round up to 16 bytes, a fit splits when the remainder can hold a header
/// plus a minimum block, and a free merges with free neighbours.
struct ShadowHeap {
    blocks: Vec<Block>,
}

impl ShadowHeap {
    fn new(bytes: usize) -> Self {
        let bytes = bytes & !15;
        ShadowHeap { blocks: vec![Block { off: 0, size: bytes - HDR, free: true }] }
    }

    fn need(bytes: usize) -> usize {
        ((bytes.max(1) + 15) & !15).max(MIN)
    }

    fn fits(&self, bytes: usize) -> bool {
        let need = Self::need(bytes);
        self.blocks.iter().any(|b| b.free && b.size >= need)
    }

    /// Payload offset of the new block.
    fn alloc(&mut self, bytes: usize) -> Option<usize> {
        let need = Self::need(bytes);
        let i = self.blocks.iter().position(|b| b.free && b.size >= need)?;
        let b = self.blocks[i];
        if b.size - need >= HDR + MIN {
            self.blocks[i] = Block { off: b.off, size: need, free: false };
            self.blocks.insert(i + 1, Block { off: b.off + HDR + need, size: b.size - need - HDR, free: true });
        } else {
            self.blocks[i].free = false;
        }
        Some(b.off + HDR)
    }

    fn free(&mut self, payload: usize) {
        let mut i = self.blocks.iter().position(|b| b.off + HDR == payload).expect("live block");
        self.blocks[i].free = true;
        if i + 1 < self.blocks.len() && self.blocks[i + 1].free {
            let n = self.blocks.remove(i + 1);
            self.blocks[i].size += HDR + n.size;
        }
        if i > 0 && self.blocks[i - 1].free {
            let b = self.blocks.remove(i);
            i -= 1;
            self.blocks[i].size += HDR + b.size;
        }
    }

    fn free_bytes(&self) -> usize {
        self.blocks.iter().filter(|b| b.free).map(|b| b.size).sum()
    }
}

enum Op {
    Alloc(usize, usize),
    Free(usize),
}

/// Random trace that never exhausts the model heap, with the model's
/// expected output line for every step.
fn shadow_trace(seed: u64, ops: usize, heap: usize) -> (Vec<Op>, Vec<String>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut model = ShadowHeap::new(heap);
    let mut live: Vec<(usize, usize)> = Vec::new();
    let mut spare: Vec<usize> = (0..4096).rev().collect();
    let (mut trace, mut want) = (Vec::with_capacity(ops), Vec::with_capacity(ops));
    for step in 0..ops {
        // Drift the target population so both sparse and crowded heaps occur.
        let target = 8 + (step / 5000 % 8) * 24;
        let bytes = if rng.gen_bool(0.7) { rng.gen_range(1..=96) } else { rng.gen_range(1..=6000) };
        let grow = live.is_empty() || (rng.gen_range(0..2 * target) >= live.len() && !spare.is_empty());
        if grow && model.fits(bytes) {
            let id = spare.pop().unwrap();
            let off = model.alloc(bytes).unwrap();
            live.push((id, off));
            trace.push(Op::Alloc(id, bytes));
            want.push(format!("{off} {}", model.free_bytes()));
        } else {
            let (id, off) = live.swap_remove(rng.gen_range(0..live.len()));
            model.free(off);
            spare.push(id);
            trace.push(Op::Free(id));
            want.push(format!("- {}", model.free_bytes()));
        }
    }
    for (id, off) in live.drain(..) {
        model.free(off);
        trace.push(Op::Free(id));
        want.push(format!("- {}", model.free_bytes()));
    }
    assert_eq!(model.blocks.len(), 1, "model must coalesce back to one block");
    (trace, want)
}

fn replay(exe: &Path, heap: usize, trace: &[Op]) -> (Option<i32>, Vec<String>) {
    let mut input = String::new();
    for op in trace {
        match op {
            Op::Alloc(id, n) => input.push_str(&format!("a {id} {n}\n")),
            Op::Free(id) => input.push_str(&format!("f {id}\n")),
        }
    }
    let mut child =
        Command::new(exe).arg(heap.to_string()).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    (out.status.code(), String::from_utf8_lossy(&out.stdout).lines().map(str::to_owned).collect())
}

/// 10^5-operation traces: every placement and every free-byte count
/// equals the reference model, and the heap coalesces back to its
/// initial state.
#[test]
fn heap_trace_matches_reference_allocator() {
    let dir = tempfile::tempdir().unwrap();
    let exe = build(dir.path(), "heap_trace");
    for (seed, heap) in [(1u64, 1usize << 18), (2, 96 * 1024), (3, 1 << 20)] {
        let (trace, want) = shadow_trace(seed, 100_000, heap);
        let (status, got) = replay(&exe, heap, &trace);
        assert_eq!(status, Some(0), "seed {seed}");
        assert_eq!(got.len(), want.len(), "seed {seed}");
        if let Some(i) = (0..want.len()).find(|&i| got[i] != want[i]) {
            panic!("seed {seed} step {i}: runtime `{}`, model `{}`", got[i], want[i]);
        }
        assert_eq!(want.last().unwrap(), &format!("- {}", (heap & !15) - HDR));
    }
}

/// An allocation the model cannot place makes the runtime fail with
/// OutOfMemory after every earlier step matched.
#[test]
fn heap_exhaustion_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let exe = build(dir.path(), "heap_trace");
    let heap = 8192;
    let mut model = ShadowHeap::new(heap);
    let mut trace = Vec::new();
    let mut want = Vec::new();
    let mut id = 0;
    while model.fits(1000) {
        let off = model.alloc(1000).unwrap();
        trace.push(Op::Alloc(id, 1000));
        want.push(format!("{off} {}", model.free_bytes()));
        id += 1;
    }
    trace.push(Op::Alloc(id, 1000));
    let (status, got) = replay(&exe, heap, &trace);
    assert_eq!(status, Some(12));
    // The runtime's exit frame follows the text lines on stdout.
    assert_eq!(got.len(), want.len() + 1);
    assert_eq!(got[..want.len()], want[..]);
}
