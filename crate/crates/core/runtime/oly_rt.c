/*
 * oly_rt.c - resident part of the microdyn abstract machine.
 *
 * Channel: the kernel writes little-endian frames on stdout and reads
 * load responses from stdin.
 *   LOAD   0x01 u32 len name        -> status u8, u32 size, code bytes
 *   OUTPUT 0x02 u32 len text
 *   EXIT   0x03 i32 status
 *   TIMING 0x04 f64 seconds         (compute time, load waits excluded)
 */
#define _DEFAULT_SOURCE 1
#define _POSIX_C_SOURCE 200809L

#include "oly_rt.h"

#include <errno.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/mman.h>
#include <time.h>
#include <unistd.h>

#define OP_LOAD 0x01
#define OP_OUTPUT 0x02
#define OP_EXIT 0x03
#define OP_TIMING 0x04

#define HEAP_HDR 16u
#define HEAP_MIN 16u
#define HEAP_FREE_BIT 1u
#define OLY_MIN_CODE_BYTES (64u * 1024u)

static OlyCtx the_ctx;
/* Set from OLY_TRACE_HEAP: report data and code free bytes around loads
 * and deletes. */
static int trace_heap;

static void heap_trace(OlyCtx *ctx, const char *what, Str name)
{
    if (trace_heap)
        fprintf(stderr, "oly-heap: %s %s %zu %zu\n", what, name, oly_heap_free_bytes(ctx), oly_code_free_bytes(ctx));
}

static const char *error_name(int code)
{
    switch (code) {
    case OLY_ERR_UNLOADED_PROC: return "UnloadedProcError";
    case OLY_ERR_UNKNOWN_FUNCTION: return "UnknownFunctionError";
    case OLY_ERR_OUT_OF_MEMORY: return "OutOfMemory";
    case OLY_ERR_FRAME_OVERFLOW: return "FrameOverflow";
    case OLY_ERR_CHANNEL: return "ChannelError";
    case OLY_ERR_INDEX: return "IndexError";
    case OLY_ERR_ZERO_DIVISION: return "ZeroDivisionError";
    case OLY_ERR_DELETE_STATIC_PROC: return "DeleteStaticProcError";
    case OLY_ERR_EXEC_HEAP: return "ExecHeapUnavailable";
    default: return "RuntimeError";
    }
}

double oly_now(void)
{
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (double)ts.tv_sec + (double)ts.tv_nsec * 1e-9;
}

/* ------------------------------------------------------------------ */
/* Channel.                                                           */

static int write_all(const void *buf, size_t len)
{
    const unsigned char *p = buf;
    while (len > 0) {
        ssize_t n = write(1, p, len);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            return -1;
        }
        p += n;
        len -= (size_t)n;
    }
    return 0;
}

static int read_all(void *buf, size_t len)
{
    unsigned char *p = buf;
    while (len > 0) {
        ssize_t n = read(0, p, len);
        if (n == 0)
            return -1;
        if (n < 0) {
            if (errno == EINTR)
                continue;
            return -1;
        }
        p += n;
        len -= (size_t)n;
    }
    return 0;
}

static void put_u32(unsigned char *b, uint32_t v)
{
    b[0] = (unsigned char)v;
    b[1] = (unsigned char)(v >> 8);
    b[2] = (unsigned char)(v >> 16);
    b[3] = (unsigned char)(v >> 24);
}

static uint32_t get_u32(const unsigned char *b)
{
    return (uint32_t)b[0] | ((uint32_t)b[1] << 8) | ((uint32_t)b[2] << 16) | ((uint32_t)b[3] << 24);
}

static void send_exit(int status)
{
    unsigned char msg[5];
    msg[0] = OP_EXIT;
    put_u32(msg + 1, (uint32_t)status);
    write_all(msg, sizeof msg);
}

static void flush_output(OlyCtx *ctx)
{
    if (ctx->out_len == 0)
        return;
    unsigned char hdr[5];
    hdr[0] = OP_OUTPUT;
    put_u32(hdr + 1, (uint32_t)ctx->out_len);
    if (write_all(hdr, sizeof hdr) != 0 || write_all(ctx->out, ctx->out_len) != 0) {
        ctx->out_len = 0;
        fprintf(stderr, "oly: ChannelError: output\n");
        _exit(OLY_ERR_CHANNEL);
    }
    ctx->out_len = 0;
}

void oly_output_text(OlyCtx *ctx, const char *text, size_t len)
{
    if (ctx->out_len + len > ctx->out_cap) {
        size_t cap = ctx->out_cap ? ctx->out_cap : 256;
        while (cap < ctx->out_len + len)
            cap *= 2;
        char *grown = realloc(ctx->out, cap);
        if (!grown)
            oly_fail(ctx, OLY_ERR_OUT_OF_MEMORY);
        ctx->out = grown;
        ctx->out_cap = cap;
    }
    memcpy(ctx->out + ctx->out_len, text, len);
    ctx->out_len += len;
}

void oly_fail(OlyCtx *ctx, int code)
{
    flush_output(ctx);
    fprintf(stderr, "oly: %s\n", error_name(code));
    fflush(stderr);
    send_exit(code);
    _exit(code);
}

/* ------------------------------------------------------------------ */
/* Heap: first fit over blocks that tile the arena.                   */
/* Header word 0: payload size | free bit.  Word 1: previous payload  */
/* size (0 for the first block).                                      */

typedef struct HeapHdr {
    uint64_t size;
    uint64_t prev;
} HeapHdr;

static HeapHdr *hdr_at(unsigned char *base, size_t off) { return (HeapHdr *)(base + off); }

static size_t blk_size(const HeapHdr *h) { return (size_t)(h->size & ~(uint64_t)HEAP_FREE_BIT); }

static int blk_free(const HeapHdr *h) { return (int)(h->size & HEAP_FREE_BIT); }

static void region_format(unsigned char *base, size_t bytes)
{
    HeapHdr *h = hdr_at(base, 0);
    h->size = (uint64_t)(bytes - HEAP_HDR) | HEAP_FREE_BIT;
    h->prev = 0;
}

static void *region_alloc(unsigned char *base, size_t limit, size_t bytes)
{
    if (bytes == 0)
        bytes = 1;
    size_t need = (bytes + 15u) & ~(size_t)15u;
    if (need < HEAP_MIN)
        need = HEAP_MIN;
    size_t off = 0;
    while (off < limit) {
        HeapHdr *h = hdr_at(base, off);
        size_t sz = blk_size(h);
        if (blk_free(h) && sz >= need) {
            if (sz - need >= HEAP_HDR + HEAP_MIN) {
                size_t rest = sz - need - HEAP_HDR;
                HeapHdr *split = hdr_at(base, off + HEAP_HDR + need);
                split->size = (uint64_t)rest | HEAP_FREE_BIT;
                split->prev = need;
                size_t next = off + HEAP_HDR + sz;
                if (next < limit)
                    hdr_at(base, next)->prev = rest;
                h->size = need;
            } else {
                h->size = sz;
            }
            return (unsigned char *)h + HEAP_HDR;
        }
        off += HEAP_HDR + sz;
    }
    return 0;
}

static void region_free(unsigned char *base, size_t limit, void *payload, int poison)
{
    size_t off = (size_t)((unsigned char *)payload - base) - HEAP_HDR;
    HeapHdr *h = hdr_at(base, off);
    size_t sz = blk_size(h);
    if (poison)
        memset(payload, 0xCC, sz);
    size_t next = off + HEAP_HDR + sz;
    if (next < limit) {
        HeapHdr *n = hdr_at(base, next);
        if (blk_free(n)) {
            sz += HEAP_HDR + blk_size(n);
            next = off + HEAP_HDR + sz;
        }
    }
    if (off > 0) {
        size_t prev_off = off - HEAP_HDR - (size_t)h->prev;
        HeapHdr *p = hdr_at(base, prev_off);
        if (blk_free(p)) {
            sz += HEAP_HDR + blk_size(p);
            off = prev_off;
            h = p;
        }
    }
    h->size = (uint64_t)sz | HEAP_FREE_BIT;
    if (next < limit)
        hdr_at(base, next)->prev = sz;
}

static size_t region_free_bytes(unsigned char *base, size_t limit)
{
    size_t off = 0, total = 0;
    while (off < limit) {
        HeapHdr *h = hdr_at(base, off);
        if (blk_free(h))
            total += blk_size(h);
        off += HEAP_HDR + blk_size(h);
    }
    return total;
}

void *oly_heap_alloc(OlyCtx *ctx, size_t bytes)
{
    void *p = region_alloc(ctx->heap, ctx->heap_bytes, bytes);
    if (!p)
        oly_fail(ctx, OLY_ERR_OUT_OF_MEMORY);
    return p;
}

void oly_heap_free(OlyCtx *ctx, void *payload)
{
    if (payload)
        region_free(ctx->heap, ctx->heap_bytes, payload, 1);
}

size_t oly_heap_free_bytes(OlyCtx *ctx) { return region_free_bytes(ctx->heap, ctx->heap_bytes); }

size_t oly_code_free_bytes(OlyCtx *ctx) { return ctx->code ? region_free_bytes(ctx->code, ctx->code_bytes) : 0; }

/* ------------------------------------------------------------------ */
/* Frames and the display.                                            */

static Env env_at(OlyCtx *ctx, Int level) { return ctx->display + (ctx->max_lex - 1 - level); }

static Word *arena_take(OlyCtx *ctx, size_t words)
{
    size_t bytes = words * sizeof(Word);
    if ((size_t)(ctx->frame_cursor - ctx->frame_limit) < bytes)
        oly_fail(ctx, OLY_ERR_FRAME_OVERFLOW);
    ctx->frame_cursor -= bytes;
    return (Word *)ctx->frame_cursor;
}

static Word *push_raw(OlyCtx *ctx, Int slots, void *link, void *saved)
{
    char *before = ctx->frame_cursor;
    Word *base = arena_take(ctx, (size_t)(OLY_HDR_WORDS + slots)) + OLY_HDR_WORDS;
    base[-OLY_HDR_CURSOR].p = before;
    base[-OLY_HDR_CTX].p = ctx;
    base[-OLY_HDR_LINK].p = link;
    base[-OLY_HDR_SAVED].p = saved;
    base[-OLY_HDR_CHAIN].p = 0;
    for (Int k = 0; k < slots; k++)
        base[k].i = 0;
    return base;
}

Word *oly_push_frame(Env env, Int level, Int slots)
{
    OlyCtx *ctx = OLY_CTX(env);
    Env at = env_at(ctx, level);
    Word *base = push_raw(ctx, slots, level > 0 ? env_at(ctx, level - 1)[0] : 0, at[0]);
    at[0] = base;
    return base;
}

void oly_pop_frame(Env env, Int level)
{
    OlyCtx *ctx = OLY_CTX(env);
    Env at = env_at(ctx, level);
    Word *base = at[0];
    at[0] = base[-OLY_HDR_SAVED].p;
    ctx->frame_cursor = base[-OLY_HDR_CURSOR].p;
}

static void release_code(OlyCtx *ctx, Proc p)
{
    if (p->owner == 2) {
        region_free(ctx->code, ctx->code_bytes, p->code_block, 0);
        oly_heap_free(ctx, p);
    }
}

static Env enter(Env env, Proc p, const Word *args)
{
    OlyCtx *ctx = OLY_CTX(env);
    if (!p || !p->live)
        oly_fail(ctx, OLY_ERR_UNLOADED_PROC);
    Int level = p->level;
    Env ce = env_at(ctx, level);
    Word *base = push_raw(ctx, p->slots, p->def_frame, ce[0]);
    for (Int k = 0; k < p->argc; k++)
        base[k] = args[k];
    /* Level 0 always holds the global frame; the levels between must
     * follow the closure's static chain. */
    if (level >= 2) {
        Word *frame = p->def_frame;
        Int k;
        for (k = 1; k < level; k++) {
            if (ce[k] != frame)
                break;
            frame = ((Word *)frame)[-OLY_HDR_LINK].p;
        }
        if (k < level) {
            Word *save = arena_take(ctx, (size_t)(level - 1));
            frame = p->def_frame;
            for (k = 1; k < level; k++) {
                save[k - 1].p = ce[k];
                ce[k] = frame;
                frame = ((Word *)frame)[-OLY_HDR_LINK].p;
            }
            base[-OLY_HDR_CHAIN].p = save;
        }
    }
    ce[0] = base;
    p->active++;
    return ce;
}

static void leave(Env ce, Proc p)
{
    Word *base = ce[0];
    OlyCtx *ctx = (OlyCtx *)base[-OLY_HDR_CTX].p;
    Word *save = base[-OLY_HDR_CHAIN].p;
    if (save)
        for (Int k = 1; k < p->level; k++)
            ce[k] = save[k - 1].p;
    ce[0] = base[-OLY_HDR_SAVED].p;
    ctx->frame_cursor = base[-OLY_HDR_CURSOR].p;
    p->active--;
    if (!p->live && p->active == 0)
        release_code(ctx, p);
}

Int oly_call_int(Env env, Proc p, const Word *args)
{
    Env ce = enter(env, p, args);
    Int r = ((Int (*)(Env, Object))p->entry)(ce, 0);
    leave(ce, p);
    return r;
}

Real oly_call_real(Env env, Proc p, const Word *args)
{
    Env ce = enter(env, p, args);
    Real r = ((Real (*)(Env, Object))p->entry)(ce, 0);
    leave(ce, p);
    return r;
}

void *oly_call_ptr(Env env, Proc p, const Word *args)
{
    Env ce = enter(env, p, args);
    void *r = ((void *(*)(Env, Object))p->entry)(ce, 0);
    leave(ce, p);
    return r;
}

/* ------------------------------------------------------------------ */
/* Procs.                                                             */

Proc oly_mk_proc(Env env, void *entry, Int lvl, Int argc, Int slots, Int level)
{
    OlyCtx *ctx = OLY_CTX(env);
    Proc p;
    if (level <= 1) {
        p = oly_heap_alloc(ctx, sizeof(OlyProc));
        p->owner = 1;
    } else {
        p = (Proc)arena_take(ctx, (sizeof(OlyProc) + sizeof(Word) - 1) / sizeof(Word));
        p->owner = 0;
    }
    p->entry = entry;
    p->def_frame = env[lvl];
    p->level = level;
    p->argc = argc;
    p->slots = slots;
    p->code_block = 0;
    p->live = 1;
    p->active = 0;
    return p;
}

static const OlyDynInfo *find_dyn(OlyCtx *ctx, Str name)
{
    for (Int k = 0; k < ctx->dyn_count; k++)
        if (strcmp(ctx->dyn[k].name, name) == 0)
            return &ctx->dyn[k];
    return 0;
}

Proc oly_load_proc(Env env, Str name, Int lvl, Int argc)
{
    OlyCtx *ctx = OLY_CTX(env);
    double t0 = oly_now();
    const OlyDynInfo *info = find_dyn(ctx, name);
    if (!info)
        oly_fail(ctx, OLY_ERR_UNKNOWN_FUNCTION);
    if (!ctx->heap_exec)
        oly_fail(ctx, OLY_ERR_EXEC_HEAP);
    heap_trace(ctx, "load-begin", name);
    flush_output(ctx);
    size_t len = strlen(name);
    unsigned char hdr[5];
    hdr[0] = OP_LOAD;
    put_u32(hdr + 1, (uint32_t)len);
    if (write_all(hdr, sizeof hdr) != 0 || write_all(name, len) != 0)
        oly_fail(ctx, OLY_ERR_CHANNEL);
    unsigned char resp[5];
    if (read_all(resp, sizeof resp) != 0)
        oly_fail(ctx, OLY_ERR_CHANNEL);
    if (resp[0] == 0x01)
        oly_fail(ctx, OLY_ERR_UNKNOWN_FUNCTION);
    if (resp[0] != 0x00)
        oly_fail(ctx, OLY_ERR_CHANNEL);
    uint32_t size = get_u32(resp + 1);
    /* Code and the proc record live apart: the record is written on every
     * call, and stores near executing code stall the pipeline. */
    unsigned char *code = region_alloc(ctx->code, ctx->code_bytes, size);
    if (!code)
        oly_fail(ctx, OLY_ERR_OUT_OF_MEMORY);
    Proc p = oly_heap_alloc(ctx, sizeof(OlyProc));
    if (read_all(code, size) != 0)
        oly_fail(ctx, OLY_ERR_CHANNEL);
    __builtin___clear_cache((char *)code, (char *)(code + size));
    p->entry = code;
    p->def_frame = env[lvl];
    p->level = info->level;
    p->argc = argc;
    p->slots = info->slots;
    p->code_block = code;
    p->live = 1;
    p->active = 0;
    p->owner = 2;
    ctx->load_seconds += oly_now() - t0;
    heap_trace(ctx, "load-end", name);
    return p;
}

void oly_delete_proc(Env env, Int lvl, Int off)
{
    OlyCtx *ctx = OLY_CTX(env);
    Proc *slot = &((Proc *)env[lvl])[off];
    Proc p = *slot;
    *slot = 0;
    if (!p || p->owner != 2)
        return;
    p->live = 0;
    if (p->active == 0)
        release_code(ctx, p);
    heap_trace(ctx, "delete", "-");
}

/* ------------------------------------------------------------------ */
/* Composite values.                                                  */

Vector oly_vector_new(Env env, Int n, Word fill)
{
    OlyCtx *ctx = OLY_CTX(env);
    if (n < 0)
        n = 0;
    Vector v = oly_heap_alloc(ctx, sizeof(OlyVector) + (size_t)n * sizeof(Word));
    v->ctx = ctx;
    v->len = n;
    for (Int k = 0; k < n; k++)
        v->data[k] = fill;
    return v;
}

Vector oly_vector_lit(Env env, Int n, const Word *elems)
{
    OlyCtx *ctx = OLY_CTX(env);
    Vector v = oly_heap_alloc(ctx, sizeof(OlyVector) + (size_t)n * sizeof(Word));
    v->ctx = ctx;
    v->len = n;
    for (Int k = 0; k < n; k++)
        v->data[k] = elems[k];
    return v;
}

Complex oly_complex_new(Env env, Real re, Real im)
{
    Complex c = oly_heap_alloc(OLY_CTX(env), sizeof(OlyComplex));
    c->re = re;
    c->im = im;
    return c;
}

Str oly_str_persist(Env env, Str s)
{
    size_t len = strlen(s);
    char *copy = oly_heap_alloc(OLY_CTX(env), len + 1);
    memcpy(copy, s, len + 1);
    return copy;
}

/* ------------------------------------------------------------------ */
/* Printing: reals use the shortest round-trip repr.                  */

static void format_real(char *out, size_t cap, Real x, int complex_part)
{
    if (x != x) {
        snprintf(out, cap, "nan");
        return;
    }
    if (x == 1.0 / 0.0 || x == -1.0 / 0.0) {
        snprintf(out, cap, x > 0 ? "inf" : "-inf");
        return;
    }
    if (x == 0.0) {
        int neg = 1.0 / x < 0;
        snprintf(out, cap, "%s%s", neg ? "-" : "", complex_part ? "0" : "0.0");
        return;
    }
    char buf[64];
    int prec;
    for (prec = 1; prec <= 17; prec++) {
        snprintf(buf, sizeof buf, "%.*e", prec - 1, x);
        if (strtod(buf, 0) == x)
            break;
    }
    /* buf = [-]d.ddde[+-]xx */
    int neg = buf[0] == '-';
    const char *p = buf + neg;
    char digits[32];
    int nd = 0;
    while (*p && *p != 'e') {
        if (*p != '.')
            digits[nd++] = *p;
        p++;
    }
    digits[nd] = 0;
    while (nd > 1 && digits[nd - 1] == '0')
        digits[--nd] = 0;
    int exp10 = atoi(p + 1);
    char res[64];
    size_t r = 0;
    if (neg)
        res[r++] = '-';
    if (exp10 < -4 || exp10 >= 16) {
        res[r++] = digits[0];
        if (nd > 1) {
            res[r++] = '.';
            for (int k = 1; k < nd; k++)
                res[r++] = digits[k];
        }
        r += (size_t)snprintf(res + r, sizeof res - r, "e%c%02d", exp10 < 0 ? '-' : '+',
                              exp10 < 0 ? -exp10 : exp10);
    } else if (exp10 < 0) {
        res[r++] = '0';
        res[r++] = '.';
        for (int k = 0; k < -exp10 - 1; k++)
            res[r++] = '0';
        for (int k = 0; k < nd; k++)
            res[r++] = digits[k];
        res[r] = 0;
    } else {
        for (int k = 0; k <= exp10; k++)
            res[r++] = k < nd ? digits[k] : '0';
        if (nd > exp10 + 1) {
            res[r++] = '.';
            for (int k = exp10 + 1; k < nd; k++)
                res[r++] = digits[k];
        } else if (!complex_part) {
            res[r++] = '.';
            res[r++] = '0';
        }
        res[r] = 0;
    }
    snprintf(out, cap, "%s", res);
}

static void emit(OlyCtx *ctx, const char *s) { oly_output_text(ctx, s, strlen(s)); }

void oly_print_int(Env env, Int x)
{
    char buf[32];
    snprintf(buf, sizeof buf, "%lld", (long long)x);
    emit(OLY_CTX(env), buf);
}

void oly_print_real(Env env, Real x)
{
    char buf[64];
    format_real(buf, sizeof buf, x, 0);
    emit(OLY_CTX(env), buf);
}

void oly_print_str(Env env, Str s) { emit(OLY_CTX(env), s); }

void oly_print_complex(Env env, Complex c)
{
    OlyCtx *ctx = OLY_CTX(env);
    char re[64], im[64];
    format_real(im, sizeof im, c->im, 1);
    if (c->re == 0.0 && !(1.0 / c->re < 0)) {
        emit(ctx, im);
        emit(ctx, "j");
        return;
    }
    format_real(re, sizeof re, c->re, 1);
    emit(ctx, "(");
    emit(ctx, re);
    if (im[0] != '-')
        emit(ctx, "+");
    emit(ctx, im);
    emit(ctx, "j)");
}

void oly_print_vector_int(Env env, Vector v)
{
    OlyCtx *ctx = OLY_CTX(env);
    emit(ctx, "[");
    for (Int k = 0; k < v->len; k++) {
        if (k)
            emit(ctx, ", ");
        oly_print_int(env, v->data[k].i);
    }
    emit(ctx, "]");
}

void oly_print_vector_real(Env env, Vector v)
{
    OlyCtx *ctx = OLY_CTX(env);
    emit(ctx, "[");
    for (Int k = 0; k < v->len; k++) {
        if (k)
            emit(ctx, ", ");
        oly_print_real(env, v->data[k].r);
    }
    emit(ctx, "]");
}

void oly_print_sep(Env env) { emit(OLY_CTX(env), " "); }

void oly_print_nl(Env env)
{
    OlyCtx *ctx = OLY_CTX(env);
    emit(ctx, "\n");
    flush_output(ctx);
}

/* ------------------------------------------------------------------ */
/* Lifecycle.                                                         */

static const OlyRt the_rt = {
    oly_call_int,      oly_call_real,         oly_call_ptr,          oly_mk_proc,
    oly_load_proc,     oly_delete_proc,       oly_vector_new,        oly_vector_lit,
    oly_complex_new,   oly_str_persist,       oly_print_int,         oly_print_real,
    oly_print_str,     oly_print_complex,     oly_print_vector_int,  oly_print_vector_real,
    oly_print_sep,     oly_print_nl,          oly_fail,
};

Env rt_init(Int max_lex, size_t frame_bytes, size_t heap_bytes, Int global_slots, unsigned flags)
{
    OlyCtx *ctx = &the_ctx;
    memset(ctx, 0, sizeof *ctx);
    trace_heap = getenv("OLY_TRACE_HEAP") != 0;
    ctx->rt = &the_rt;
    if (max_lex <= 0 || frame_bytes == 0 || heap_bytes < 2 * HEAP_HDR) {
        fprintf(stderr, "oly: invalid runtime configuration\n");
        send_exit(OLY_ERR_OUT_OF_MEMORY);
        _exit(OLY_ERR_OUT_OF_MEMORY);
    }
    ctx->max_lex = max_lex;
    ctx->display = calloc((size_t)max_lex, sizeof(void *));
    char *frames = malloc(frame_bytes);
    heap_bytes &= ~(size_t)15u;
    void *heap = mmap(0, heap_bytes, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (flags & OLY_RT_DYNAMIC) {
        size_t code_bytes = ((heap_bytes / 4) + 4095u) & ~(size_t)4095u;
        if (code_bytes < OLY_MIN_CODE_BYTES)
            code_bytes = OLY_MIN_CODE_BYTES;
        void *code = mmap(0, code_bytes, PROT_READ | PROT_WRITE | PROT_EXEC, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
        if (code == MAP_FAILED) {
            fprintf(stderr, "oly: ExecHeapUnavailable\n");
            send_exit(OLY_ERR_EXEC_HEAP);
            _exit(OLY_ERR_EXEC_HEAP);
        }
        ctx->code = code;
        ctx->code_bytes = code_bytes;
        region_format(ctx->code, code_bytes);
    }
    if (!ctx->display || !frames || heap == MAP_FAILED) {
        fprintf(stderr, "oly: OutOfMemory\n");
        send_exit(OLY_ERR_OUT_OF_MEMORY);
        _exit(OLY_ERR_OUT_OF_MEMORY);
    }
    ctx->heap = heap;
    ctx->heap_bytes = heap_bytes;
    ctx->heap_exec = (flags & OLY_RT_DYNAMIC) != 0;
    region_format(ctx->heap, heap_bytes);
    ctx->frame_limit = frames;
    ctx->frame_top = frames + (frame_bytes & ~(size_t)7u);
    ctx->frame_cursor = ctx->frame_top;
    Env env = env_at(ctx, 0);
    env[0] = push_raw(ctx, global_slots, 0, 0);
    ctx->start_seconds = oly_now();
    return env;
}

void rt_set_dyn_table(Env env, const OlyDynInfo *table, Int count)
{
    OlyCtx *ctx = OLY_CTX(env);
    ctx->dyn = table;
    ctx->dyn_count = count;
}

int rt_finish(Env env)
{
    OlyCtx *ctx = OLY_CTX(env);
    double elapsed = oly_now() - ctx->start_seconds - ctx->load_seconds;
    flush_output(ctx);
    unsigned char msg[9];
    uint64_t bits;
    memcpy(&bits, &elapsed, sizeof bits);
    msg[0] = OP_TIMING;
    for (int k = 0; k < 8; k++)
        msg[1 + k] = (unsigned char)(bits >> (8 * k));
    write_all(msg, sizeof msg);
    send_exit(0);
    return 0;
}
