/*
 * oly_rt.h - abstract machine used by code emitted by microdyn.
 *
 * Variables live in frames addressed through a display.  An `Env` points
 * into the display so that env[0] is always the frame of the running
 * function and env[k] is the frame k lexical levels further out.
 *
 * Units compiled with OLY_DYNAMIC_UNIT are loaded from the host at run
 * time and copied into the heap, so they may not reference any symbol or
 * read-only data: runtime services are reached through the service table
 * stored in every frame header, and literal constants are materialised
 * from immediates.
 */
#ifndef OLY_RT_H
#define OLY_RT_H

#include <stddef.h>
#include <stdint.h>

typedef int64_t Int;
typedef double Real;
typedef void *Object;
typedef void **Env;
typedef const char *Str;

typedef union Word {
    Int i;
    Real r;
    void *p;
} Word;

typedef struct OlyComplex {
    Real re;
    Real im;
} OlyComplex, *Complex;

struct OlyCtx;

typedef struct OlyVector {
    struct OlyCtx *ctx;
    /* Deliberately not Int: a distinct type tells the compiler that stores
     * to Int frame slots cannot change a vector's length. */
    long long len;
    Word data[];
} OlyVector, *Vector;

typedef struct OlyProc {
    void *entry;
    void *def_frame;
    Int level;
    Int argc;
    Int slots;
    void *code_block;
    Int live;
    Int active;
    Int owner; /* 0 = frame arena, 1 = heap, 2 = heap plus loaded code */
} OlyProc, *Proc;

/* Exit statuses shared with the host and the reference interpreter. */
enum {
    OLY_OK = 0,
    OLY_ERR_UNLOADED_PROC = 10,
    OLY_ERR_UNKNOWN_FUNCTION = 11,
    OLY_ERR_OUT_OF_MEMORY = 12,
    OLY_ERR_FRAME_OVERFLOW = 13,
    OLY_ERR_CHANNEL = 14,
    OLY_ERR_INDEX = 15,
    OLY_ERR_ZERO_DIVISION = 16,
    OLY_ERR_DELETE_STATIC_PROC = 17,
    OLY_ERR_EXEC_HEAP = 18
};

/* Frame header words, below slot 0. */
#define OLY_HDR_CURSOR 1
#define OLY_HDR_CTX 2
#define OLY_HDR_LINK 3
#define OLY_HDR_SAVED 4
#define OLY_HDR_CHAIN 5
#define OLY_HDR_WORDS 5

typedef struct OlyRt {
    Int (*call_int)(Env, Proc, const Word *);
    Real (*call_real)(Env, Proc, const Word *);
    void *(*call_ptr)(Env, Proc, const Word *);
    Proc (*mk_proc)(Env, void *, Int, Int, Int, Int);
    Proc (*load_proc)(Env, Str, Int, Int);
    void (*delete_proc)(Env, Int, Int);
    Vector (*vector_new)(Env, Int, Word);
    Vector (*vector_lit)(Env, Int, const Word *);
    Complex (*complex_new)(Env, Real, Real);
    Str (*str_persist)(Env, Str);
    void (*print_int)(Env, Int);
    void (*print_real)(Env, Real);
    void (*print_str)(Env, Str);
    void (*print_complex)(Env, Complex);
    void (*print_vector_int)(Env, Vector);
    void (*print_vector_real)(Env, Vector);
    void (*print_sep)(Env);
    void (*print_nl)(Env);
    void (*fail)(struct OlyCtx *, int);
} OlyRt;

typedef struct OlyDynInfo {
    const char *name;
    Int argc;
    Int slots;
    Int level;
} OlyDynInfo;

typedef struct OlyCtx {
    const OlyRt *rt;
    char *frame_cursor;
    char *frame_limit;
    char *frame_top;
    void **display;
    Int max_lex;
    unsigned char *heap;
    size_t heap_bytes;
    /* Executable region holding loaded code, apart from written data. */
    unsigned char *code;
    size_t code_bytes;
    int heap_exec;
    const OlyDynInfo *dyn;
    Int dyn_count;
    double load_seconds;
    double start_seconds;
    char *out;
    size_t out_len;
    size_t out_cap;
} OlyCtx;

#define OLY_INLINE static inline __attribute__((always_inline))

#define OLY_FRAME_CTX(frame) ((OlyCtx *)(((Word *)(frame))[-OLY_HDR_CTX].p))
#define OLY_CTX(env) OLY_FRAME_CTX((env)[0])

/* ------------------------------------------------------------------ */
/* Typed slot access: direct indexed addressing from the display.      */

#define lookup_int(env, lvl, off) (((Int *)((env)[(lvl)]))[(off)])
#define lookup_real(env, lvl, off) (((Real *)((env)[(lvl)]))[(off)])
#define lookup_complex(env, lvl, off) (((Complex *)((env)[(lvl)]))[(off)])
#define lookup_vector(env, lvl, off) (((Vector *)((env)[(lvl)]))[(off)])
#define lookup_proc(env, lvl, off) (((Proc *)((env)[(lvl)]))[(off)])
#define lookup_str(env, lvl, off) (((Str *)((env)[(lvl)]))[(off)])
#define lookup_object(env, lvl, off) (((Object *)((env)[(lvl)]))[(off)])

#define update_int(env, lvl, off, value) (((Int *)((env)[(lvl)]))[(off)] = (Int)((value)))
#define update_real(env, lvl, off, value) (((Real *)((env)[(lvl)]))[(off)] = (Real)((value)))
#define update_complex(env, lvl, off, value) (((Complex *)((env)[(lvl)]))[(off)] = (Complex)((value)))
#define update_vector(env, lvl, off, value) (((Vector *)((env)[(lvl)]))[(off)] = (Vector)((value)))
#define update_proc_at(env, lvl, off, value) (((Proc *)((env)[(lvl)]))[(off)] = (Proc)((value)))
#define update_str(env, lvl, off, value) (((Str *)((env)[(lvl)]))[(off)] = (Str)((value)))
#define update_object(env, lvl, off, value) (((Object *)((env)[(lvl)]))[(off)] = (Object)((value)))

#define declare_proc(env, off, name, proc) update_proc_at(env, 0, off, proc)
#define update_proc(env, off, proc) update_proc_at(env, 0, off, proc)

/* ------------------------------------------------------------------ */
/* Service routing.                                                   */

#ifdef OLY_DYNAMIC_UNIT
#define OLY_SVC(env, fn) (OLY_CTX(env)->rt->fn)
#else
Int oly_call_int(Env, Proc, const Word *);
Real oly_call_real(Env, Proc, const Word *);
void *oly_call_ptr(Env, Proc, const Word *);
Proc oly_mk_proc(Env, void *, Int, Int, Int, Int);
Proc oly_load_proc(Env, Str, Int, Int);
void oly_delete_proc(Env, Int, Int);
Vector oly_vector_new(Env, Int, Word);
Vector oly_vector_lit(Env, Int, const Word *);
Complex oly_complex_new(Env, Real, Real);
Str oly_str_persist(Env, Str);
void oly_print_int(Env, Int);
void oly_print_real(Env, Real);
void oly_print_str(Env, Str);
void oly_print_complex(Env, Complex);
void oly_print_vector_int(Env, Vector);
void oly_print_vector_real(Env, Vector);
void oly_print_sep(Env);
void oly_print_nl(Env);
__attribute__((noreturn, cold)) void oly_fail(OlyCtx *, int);
#define OLY_SVC(env, fn) (oly_##fn)
#endif

#define OLY_UNLIKELY(c) __builtin_expect(!!(c), 0)

#ifdef OLY_DYNAMIC_UNIT
#define OLY_FAIL(ctx, code) ((ctx)->rt->fail((ctx), (code)))
#else
#define OLY_FAIL(ctx, code) oly_fail((ctx), (code))
#endif

#define call_proc_int(env, proc, args) OLY_SVC(env, call_int)((env), (proc), (args))
#define call_proc_real(env, proc, args) OLY_SVC(env, call_real)((env), (proc), (args))
#define call_proc_ptr(env, proc, args) OLY_SVC(env, call_ptr)((env), (proc), (args))

#define mk_proc(fn, env, argc) \
    OLY_SVC(env, mk_proc)((env), (void *)(fn), 0, (argc), fn##_slots, fn##_level)
#define mk_proc_at(fn, env, lvl, argc) \
    OLY_SVC(env, mk_proc)((env), (void *)(fn), (lvl), (argc), fn##_slots, fn##_level)
#define load_proc(name, env, argc) OLY_SVC(env, load_proc)((env), (name), 0, (argc))
#define load_proc_at(name, env, lvl, argc) OLY_SVC(env, load_proc)((env), (name), (lvl), (argc))
#define delete_proc(env, lvl, off) OLY_SVC(env, delete_proc)((env), (lvl), (off))

#define vector_new(env, n, fill) OLY_SVC(env, vector_new)((env), (n), (fill))
#define vector_lit(env, n, elems) OLY_SVC(env, vector_lit)((env), (n), (elems))
#define complex_new(env, re, im) OLY_SVC(env, complex_new)((env), (re), (im))
#define str_persist(env, s) OLY_SVC(env, str_persist)((env), (s))

#define print_int(env, x) OLY_SVC(env, print_int)((env), (x))
#define print_real(env, x) OLY_SVC(env, print_real)((env), (x))
#define print_str(env, x) OLY_SVC(env, print_str)((env), (x))
#define print_complex(env, x) OLY_SVC(env, print_complex)((env), (x))
#define print_vector_int(env, x) OLY_SVC(env, print_vector_int)((env), (x))
#define print_vector_real(env, x) OLY_SVC(env, print_vector_real)((env), (x))
#define print_sep(env) OLY_SVC(env, print_sep)((env))
#define print_nl(env) OLY_SVC(env, print_nl)((env))

/* ------------------------------------------------------------------ */
/* Values.                                                            */

OLY_INLINE Int oly_vindex(Vector v, Int i)
{
    if (OLY_UNLIKELY((uint64_t)i >= (uint64_t)v->len))
        OLY_FAIL(v->ctx, OLY_ERR_INDEX);
    return i;
}

OLY_INLINE Int vector_len(Vector v) { return (Int)v->len; }
/* Elements are accessed through typed pointers rather than the Word union,
 * so that element stores are known not to alias frame slots of other
 * types or the display. */
OLY_INLINE Int vector_lookup_int(Vector v, Int i) { return ((Int *)v->data)[oly_vindex(v, i)]; }
OLY_INLINE Real vector_lookup_real(Vector v, Int i) { return ((Real *)v->data)[oly_vindex(v, i)]; }
OLY_INLINE void vector_update_int(Vector v, Int i, Int x) { ((Int *)v->data)[oly_vindex(v, i)] = x; }
OLY_INLINE void vector_update_real(Vector v, Int i, Real x) { ((Real *)v->data)[oly_vindex(v, i)] = x; }

OLY_INLINE Real complex_real(Complex c) { return c->re; }
OLY_INLINE Real complex_imag(Complex c) { return c->im; }
OLY_INLINE void update_complex_real(Complex c, Real v) { c->re = v; }
OLY_INLINE void update_complex_imag(Complex c, Real v) { c->im = v; }
OLY_INLINE Complex complex_copy(Env env, Complex c) { return complex_new(env, c->re, c->im); }
OLY_INLINE Complex complex_add(Env env, Complex a, Complex b)
{
    return complex_new(env, a->re + b->re, a->im + b->im);
}
OLY_INLINE Complex complex_sub(Env env, Complex a, Complex b)
{
    return complex_new(env, a->re - b->re, a->im - b->im);
}
OLY_INLINE Complex complex_mul(Env env, Complex a, Complex b)
{
    return complex_new(env, a->re * b->re - a->im * b->im, a->re * b->im + a->im * b->re);
}
OLY_INLINE Int complex_eq(Complex a, Complex b) { return a->re == b->re && a->im == b->im; }

/* Opaque immediates keep constants out of read-only data sections. */
OLY_INLINE Int oly_opaque(Int x)
{
    __asm__("" : "+r"(x));
    return x;
}

OLY_INLINE Real oly_real_bits(Int bits)
{
    Word w;
    w.i = oly_opaque(bits);
    return w.r;
}

#ifdef OLY_DYNAMIC_UNIT
#define OLY_REAL(bits, lit) oly_real_bits((Int)(bits))
#define OLY_INT(x) oly_opaque((Int)(x))
#else
#define OLY_REAL(bits, lit) (lit)
#define OLY_INT(x) (x)
#endif

/* ------------------------------------------------------------------ */
/* Arithmetic with the reference semantics.                           */

OLY_INLINE Int oly_floordiv_int(Env env, Int a, Int b)
{
    if (OLY_UNLIKELY(b == 0))
        OLY_FAIL(OLY_CTX(env), OLY_ERR_ZERO_DIVISION);
    if (b == -1)
        return (Int)(0 - (uint64_t)a);
    Int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        q -= 1;
    return q;
}

OLY_INLINE Int oly_mod_int(Env env, Int a, Int b)
{
    if (OLY_UNLIKELY(b == 0))
        OLY_FAIL(OLY_CTX(env), OLY_ERR_ZERO_DIVISION);
    if (b == -1)
        return 0;
    Int r = a % b;
    if (r != 0 && ((r < 0) != (b < 0)))
        r += b;
    return r;
}

OLY_INLINE Real oly_floor(Real x)
{
    Real lim = OLY_REAL(0x433FF973CAFA8000ULL, 9.0e15);
    if (!(x > -lim && x < lim))
        return x;
    Real t = (Real)(Int)x;
    return t > x ? t - OLY_REAL(0x3FF0000000000000ULL, 1.0) : t;
}

OLY_INLINE Real oly_truediv(Env env, Real a, Real b)
{
    if (OLY_UNLIKELY(b == 0.0))
        OLY_FAIL(OLY_CTX(env), OLY_ERR_ZERO_DIVISION);
    return a / b;
}

OLY_INLINE Real oly_floordiv_real(Env env, Real a, Real b)
{
    return oly_floor(oly_truediv(env, a, b));
}

OLY_INLINE Real oly_mod_real(Env env, Real a, Real b)
{
    Real r = a - b * oly_floordiv_real(env, a, b);
    return r;
}

/* ------------------------------------------------------------------ */
/* Direct (statically dispatched) calls.                              */
/* A statically dispatched function is not recursive and defines no  */
/* closures, so nothing outlives or captures its frame.  The frame    */
/* therefore lives in the caller's C stack and the arena cursor is    */
/* left alone.                                                        */

OLY_INLINE Env oly_direct_enter(Env env, Int delta, Int slots, Int argc, const Word *args, Word *frame)
{
    Env ce = env + delta;
    Word *base = frame + OLY_HDR_WORDS;
    base[-OLY_HDR_CTX].p = OLY_CTX(env);
    base[-OLY_HDR_SAVED].p = ce[0];
    Int k;
    for (k = 0; k < argc; k++)
        base[k] = args[k];
    for (; k < slots; k++)
        base[k].i = 0;
    ce[0] = base;
    return ce;
}


#define OLY_DIRECT(T, env, fn, delta, argc, args)                                  \
    __extension__({                                                                 \
        Word oly_frame_[OLY_HDR_WORDS + fn##_slots];                                \
        Env oly_ce_ = oly_direct_enter((env), (delta), fn##_slots, (argc), (args), \
                                       oly_frame_);                                 \
        T oly_r_ = fn(oly_ce_, 0);                                                  \
        oly_ce_[0] = oly_frame_[OLY_HDR_WORDS - OLY_HDR_SAVED].p;                   \
        oly_r_;                                                                     \
    })

#define call_direct_int(env, fn, delta, argc, args) OLY_DIRECT(Int, env, fn, delta, argc, args)
#define call_direct_real(env, fn, delta, argc, args) OLY_DIRECT(Real, env, fn, delta, argc, args)
#define call_direct_ptr(env, fn, delta, argc, args) OLY_DIRECT(void *, env, fn, delta, argc, args)

/* A leaf callee calls nothing that consults the display, so it runs    */
/* against a private copy of the display on the C stack.  The shared    */
/* display is never written, and once the call is inlined the frame    */
/* does not escape and can live in registers.                           */

OLY_INLINE Env oly_leaf_enter(Env env, Int delta, Int level, Int slots, Int argc, const Word *args, Word *frame,
                              void **display)
{
    Word *base = frame + OLY_HDR_WORDS;
    base[-OLY_HDR_CTX].p = OLY_CTX(env);
    Int k;
    for (k = 0; k < argc; k++)
        base[k] = args[k];
    for (; k < slots; k++)
        base[k].i = 0;
    display[0] = base;
    for (k = 1; k <= level; k++)
        display[k] = env[delta + k];
    return display;
}

#define OLY_LEAF(T, env, fn, delta, argc, args)                                                          \
    __extension__({                                                                                      \
        Word oly_frame_[OLY_HDR_WORDS + fn##_slots];                                                     \
        void *oly_pd_[fn##_level + 1];                                                                   \
        (T) fn(oly_leaf_enter((env), (delta), fn##_level, fn##_slots, (argc), (args), oly_frame_, oly_pd_), \
               0);                                                                                       \
    })

#define call_leaf_int(env, fn, delta, argc, args) OLY_LEAF(Int, env, fn, delta, argc, args)
#define call_leaf_real(env, fn, delta, argc, args) OLY_LEAF(Real, env, fn, delta, argc, args)
#define call_leaf_ptr(env, fn, delta, argc, args) OLY_LEAF(void *, env, fn, delta, argc, args)

/* ------------------------------------------------------------------ */
/* Resident-only entry points.                                        */

#ifndef OLY_DYNAMIC_UNIT
#define OLY_RT_DYNAMIC 1u

Env rt_init(Int max_lex, size_t frame_bytes, size_t heap_bytes, Int global_slots, unsigned flags);
void rt_set_dyn_table(Env env, const OlyDynInfo *table, Int count);
int rt_finish(Env env);

/* Frame and heap primitives, exposed for tests and native kernels. */
Word *oly_push_frame(Env env, Int level, Int slots);
void oly_pop_frame(Env env, Int level);
void *oly_heap_alloc(OlyCtx *ctx, size_t bytes);
void oly_heap_free(OlyCtx *ctx, void *payload);
size_t oly_heap_free_bytes(OlyCtx *ctx);
size_t oly_code_free_bytes(OlyCtx *ctx);

/* Host channel helpers. */
void oly_output_text(OlyCtx *ctx, const char *text, size_t len);
double oly_now(void);
#endif

#endif /* OLY_RT_H */
