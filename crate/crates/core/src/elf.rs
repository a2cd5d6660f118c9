//! Reader for little-endian ELF32/ELF64 objects and extraction of function
//! code for the host loader.

use thiserror::Error;

pub const ET_REL: u16 = 1;
pub const ET_EXEC: u16 = 2;
pub const ET_DYN: u16 = 3;
pub const EM_386: u16 = 3;
pub const EM_ARM: u16 = 40;
pub const EM_X86_64: u16 = 62;
pub const EM_AARCH64: u16 = 183;
pub const EM_RISCV: u16 = 243;

pub const SHT_PROGBITS: u32 = 1;
pub const SHT_SYMTAB: u32 = 2;
pub const SHT_STRTAB: u32 = 3;
pub const SHT_RELA: u32 = 4;
pub const SHT_NOBITS: u32 = 8;
pub const SHT_REL: u32 = 9;
pub const SHF_ALLOC: u64 = 0x2;
pub const SHF_EXECINSTR: u64 = 0x4;

pub const SHN_UNDEF: u16 = 0;
pub const SHN_ABS: u16 = 0xfff1;
pub const STT_FUNC: u8 = 2;

/// Machine tag of the host this crate was built for.
pub const HOST_MACHINE: u16 = if cfg!(target_arch = "x86_64") {
    EM_X86_64
} else if cfg!(target_arch = "aarch64") {
    EM_AARCH64
} else if cfg!(target_arch = "riscv64") {
    EM_RISCV
} else if cfg!(target_arch = "x86") {
    EM_386
} else {
    EM_ARM
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElfError {
    #[error("TruncatedFileError: {what} needs bytes {offset}..{end}, file has {len}")]
    TruncatedFile { what: &'static str, offset: u64, end: u64, len: usize },
    #[error("BadMagicError: not an ELF file")]
    BadMagic,
    #[error("UnsupportedClassError: EI_CLASS {0}")]
    UnsupportedClass(u8),
    #[error("UnsupportedEndiannessError: EI_DATA {0} (only little-endian is supported)")]
    UnsupportedEndianness(u8),
    #[error("NotRelocatableError: e_type {0} is not ET_REL")]
    NotRelocatable(u16),
    #[error("MalformedError: {0}")]
    Malformed(String),
    #[error("SymbolNotFoundError: no function symbol `{0}`")]
    SymbolNotFound(String),
    #[error("MachineMismatchError: object is for machine {found}, expected {expected}")]
    MachineMismatch { expected: u16, found: u16 },
    #[error("RelocationUnresolvedError: relocation at {section}+{offset:#x} against `{symbol}` inside `{function}`")]
    RelocationUnresolved { function: String, section: String, offset: u64, symbol: String },
    #[error("EntryNotAtSectionStartError: `{0}` must be the first code in its section")]
    EntryNotAtSectionStart(String),
}

type Result<T> = std::result::Result<T, ElfError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElfClass {
    Elf32,
    Elf64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub index: usize,
    pub name: String,
    pub sh_type: u32,
    pub flags: u64,
    pub offset: u64,
    pub size: u64,
    pub link: u32,
    pub info: u32,
    pub entsize: u64,
    /// File contents; empty for `SHT_NOBITS`.
    pub data: Vec<u8>,
}

impl Section {
    pub fn is_alloc(&self) -> bool {
        self.flags & SHF_ALLOC != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub value: u64,
    pub size: u64,
    pub shndx: u16,
    pub sym_type: u8,
    pub bind: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relocation {
    /// Section the relocation patches.
    pub target: usize,
    pub offset: u64,
    pub symbol: u32,
    pub r_type: u32,
    pub addend: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElfImage {
    pub class: ElfClass,
    pub endianness: Endianness,
    pub machine: u16,
    pub file_type: u16,
    pub sections: Vec<Section>,
    pub symbols: Vec<Symbol>,
    pub relocations: Vec<Relocation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElfFunction {
    pub name: String,
    pub code: Vec<u8>,
    pub size: u64,
    pub machine: u16,
}

struct Reader<'a> {
    b: &'a [u8],
}

impl<'a> Reader<'a> {
    fn slice(&self, what: &'static str, offset: u64, len: u64) -> Result<&'a [u8]> {
        let trunc = || ElfError::TruncatedFile { what, offset, end: offset.saturating_add(len), len: self.b.len() };
        let end = offset.checked_add(len).ok_or_else(trunc)?;
        if end > self.b.len() as u64 {
            return Err(trunc());
        }
        Ok(&self.b[offset as usize..end as usize])
    }

    fn u8(&self, what: &'static str, at: u64) -> Result<u8> {
        Ok(self.slice(what, at, 1)?[0])
    }

    fn u16(&self, what: &'static str, at: u64) -> Result<u16> {
        Ok(u16::from_le_bytes(self.slice(what, at, 2)?.try_into().expect("2 bytes")))
    }

    fn u32(&self, what: &'static str, at: u64) -> Result<u32> {
        Ok(u32::from_le_bytes(self.slice(what, at, 4)?.try_into().expect("4 bytes")))
    }

    fn u64(&self, what: &'static str, at: u64) -> Result<u64> {
        Ok(u64::from_le_bytes(self.slice(what, at, 8)?.try_into().expect("8 bytes")))
    }
}

fn c_str(table: &[u8], offset: u32) -> Result<String> {
    let start = offset as usize;
    if start > table.len() {
        return Err(ElfError::Malformed(format!("string offset {offset} past table end {}", table.len())));
    }
    let rest = &table[start..];
    let end = rest.iter().position(|&c| c == 0).ok_or_else(|| ElfError::Malformed("unterminated string".into()))?;
    Ok(String::from_utf8_lossy(&rest[..end]).into_owned())
}

/// Parse a relocatable object.
pub fn parse(bytes: &[u8]) -> Result<ElfImage> {
    let img = parse_any(bytes)?;
    if img.file_type != ET_REL {
        return Err(ElfError::NotRelocatable(img.file_type));
    }
    Ok(img)
}

/// Parse any ELF file type (executables included), e.g. to measure
/// section sizes of a linked binary.
pub fn parse_any(bytes: &[u8]) -> Result<ElfImage> {
    if bytes.len() < 4 || bytes[..4] != [0x7f, b'E', b'L', b'F'] {
        if bytes.len() < 4 && [0x7f, b'E', b'L', b'F'].starts_with(bytes) && !bytes.is_empty() {
            return Err(ElfError::TruncatedFile { what: "ELF identification", offset: 0, end: 16, len: bytes.len() });
        }
        return Err(ElfError::BadMagic);
    }
    let r = Reader { b: bytes };
    let class = match r.u8("ELF identification", 4)? {
        1 => ElfClass::Elf32,
        2 => ElfClass::Elf64,
        c => return Err(ElfError::UnsupportedClass(c)),
    };
    let endianness = match r.u8("ELF identification", 5)? {
        1 => Endianness::Little,
        d => return Err(ElfError::UnsupportedEndianness(d)),
    };
    let wide = class == ElfClass::Elf64;
    let ehsize: u64 = if wide { 64 } else { 52 };
    r.slice("ELF header", 0, ehsize)?;
    let file_type = r.u16("ELF header", 16)?;
    let machine = r.u16("ELF header", 18)?;
    let (shoff, shentsize_at, shnum_at, shstrndx_at) =
        if wide { (r.u64("ELF header", 40)?, 58, 60, 62) } else { (r.u32("ELF header", 32)? as u64, 46, 48, 50) };
    let shentsize = r.u16("ELF header", shentsize_at)? as u64;
    let shnum = r.u16("ELF header", shnum_at)? as u64;
    let shstrndx = r.u16("ELF header", shstrndx_at)? as u64;

    let mut img = ElfImage { class, endianness, machine, file_type, sections: vec![], symbols: vec![], relocations: vec![] };
    if shnum == 0 {
        return Ok(img);
    }
    let min_ent = if wide { 64 } else { 40 };
    if shentsize < min_ent {
        return Err(ElfError::Malformed(format!("section header entry size {shentsize}")));
    }
    r.slice("section header table", shoff, shnum * shentsize)?;
    if shstrndx >= shnum {
        return Err(ElfError::Malformed(format!("section name table index {shstrndx} out of {shnum}")));
    }

    struct Raw {
        name: u32,
        sh_type: u32,
        flags: u64,
        offset: u64,
        size: u64,
        link: u32,
        info: u32,
        entsize: u64,
    }
    let mut raws = Vec::with_capacity(shnum as usize);
    for i in 0..shnum {
        let at = shoff + i * shentsize;
        let w = "section header";
        let raw = if wide {
            Raw {
                name: r.u32(w, at)?,
                sh_type: r.u32(w, at + 4)?,
                flags: r.u64(w, at + 8)?,
                offset: r.u64(w, at + 24)?,
                size: r.u64(w, at + 32)?,
                link: r.u32(w, at + 40)?,
                info: r.u32(w, at + 44)?,
                entsize: r.u64(w, at + 56)?,
            }
        } else {
            Raw {
                name: r.u32(w, at)?,
                sh_type: r.u32(w, at + 4)?,
                flags: r.u32(w, at + 8)? as u64,
                offset: r.u32(w, at + 16)? as u64,
                size: r.u32(w, at + 20)? as u64,
                link: r.u32(w, at + 24)?,
                info: r.u32(w, at + 28)?,
                entsize: r.u32(w, at + 36)? as u64,
            }
        };
        raws.push(raw);
    }
    let data_of = |raw: &Raw| -> Result<Vec<u8>> {
        if raw.sh_type == SHT_NOBITS || raw.sh_type == 0 {
            Ok(Vec::new())
        } else {
            Ok(r.slice("section contents", raw.offset, raw.size)?.to_vec())
        }
    };
    let shstr = data_of(&raws[shstrndx as usize])?;
    for (i, raw) in raws.iter().enumerate() {
        let name = if i == 0 { String::new() } else { c_str(&shstr, raw.name)? };
        img.sections.push(Section {
            index: i,
            name,
            sh_type: raw.sh_type,
            flags: raw.flags,
            offset: raw.offset,
            size: raw.size,
            link: raw.link,
            info: raw.info,
            entsize: raw.entsize,
            data: data_of(raw)?,
        });
    }

    let nsec = img.sections.len();
    let symtab_idx = img.sections.iter().position(|s| s.sh_type == SHT_SYMTAB);
    if let Some(si) = symtab_idx {
        let st = &img.sections[si];
        let link = st.link as usize;
        if link >= nsec || img.sections[link].sh_type != SHT_STRTAB {
            return Err(ElfError::Malformed(format!("symbol table links to section {link}, not a string table")));
        }
        let strtab = &img.sections[link].data;
        let ent: usize = if wide { 24 } else { 16 };
        let data = &st.data;
        let mut syms = Vec::with_capacity(data.len() / ent);
        for chunk in data.chunks_exact(ent) {
            let sr = Reader { b: chunk };
            let w = "symbol";
            let name = sr.u32(w, 0)?;
            let (value, size, info, shndx) = if wide {
                (sr.u64(w, 8)?, sr.u64(w, 16)?, sr.u8(w, 4)?, sr.u16(w, 6)?)
            } else {
                (sr.u32(w, 4)? as u64, sr.u32(w, 8)? as u64, sr.u8(w, 12)?, sr.u16(w, 14)?)
            };
            if shndx != SHN_UNDEF && (shndx as usize) >= nsec && shndx < 0xff00 {
                return Err(ElfError::Malformed(format!("symbol section index {shndx} out of {nsec}")));
            }
            syms.push(Symbol { name: c_str(strtab, name)?, value, size, shndx, sym_type: info & 0xf, bind: info >> 4 });
        }
        img.symbols = syms;
    }

    let mut relocs = Vec::new();
    for s in &img.sections {
        if s.sh_type != SHT_RELA && s.sh_type != SHT_REL {
            continue;
        }
        let target = s.info as usize;
        if target >= nsec {
            return Err(ElfError::Malformed(format!("relocation section `{}` targets section {target}", s.name)));
        }
        let rela = s.sh_type == SHT_RELA;
        let ent: usize = match (wide, rela) {
            (true, true) => 24,
            (true, false) => 16,
            (false, true) => 12,
            (false, false) => 8,
        };
        for chunk in s.data.chunks_exact(ent) {
            let rr = Reader { b: chunk };
            let w = "relocation";
            let (offset, symbol, r_type, addend) = if wide {
                let info = rr.u64(w, 8)?;
                (rr.u64(w, 0)?, (info >> 32) as u32, info as u32, if rela { Some(rr.u64(w, 16)? as i64) } else { None })
            } else {
                let info = rr.u32(w, 4)?;
                (rr.u32(w, 0)? as u64, info >> 8, info & 0xff, if rela { Some(rr.u32(w, 8)? as i32 as i64) } else { None })
            };
            if symbol as usize >= img.symbols.len().max(1) {
                return Err(ElfError::Malformed(format!("relocation symbol index {symbol} out of range")));
            }
            relocs.push(Relocation { target, offset, symbol, r_type, addend });
        }
    }
    img.relocations = relocs;
    Ok(img)
}

impl ElfImage {
    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn function_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.sym_type == STT_FUNC && s.shndx != SHN_UNDEF)
    }

    /// Bytes of all allocated `PROGBITS` sections: code plus initialised
    /// data, the part of the image that occupies target memory.
    pub fn allocated_progbits_size(&self) -> u64 {
        self.sections.iter().filter(|s| s.sh_type == SHT_PROGBITS && s.is_alloc()).map(|s| s.size).sum()
    }

    fn symbol_name(&self, idx: u32) -> String {
        self.symbols.get(idx as usize).map(|s| s.name.clone()).unwrap_or_default()
    }

    fn locate(&self, name: &str, expected_machine: u16) -> Result<(&Symbol, &Section)> {
        if self.machine != expected_machine {
            return Err(ElfError::MachineMismatch { expected: expected_machine, found: self.machine });
        }
        let sym = self.function_symbols().find(|s| s.name == name).ok_or_else(|| ElfError::SymbolNotFound(name.into()))?;
        let sec = self
            .sections
            .get(sym.shndx as usize)
            .filter(|s| s.sh_type != SHT_NOBITS)
            .ok_or_else(|| ElfError::Malformed(format!("`{name}` lives in section {} without contents", sym.shndx)))?;
        Ok((sym, sec))
    }

    fn span<'a>(sec: &'a Section, name: &str, start: u64, len: u64) -> Result<&'a [u8]> {
        let end = start.checked_add(len).filter(|&e| e <= sec.data.len() as u64);
        match end {
            Some(end) if len > 0 => Ok(&sec.data[start as usize..end as usize]),
            _ => Err(ElfError::Malformed(format!("`{name}` span {start}+{len} outside section `{}`", sec.name))),
        }
    }

    /// Code of one function symbol. Fails if a relocation inside its span
    /// refers to an undefined symbol, since the device performs no linking.
    pub fn extract_function(&self, name: &str, expected_machine: u16) -> Result<ElfFunction> {
        let (sym, sec) = self.locate(name, expected_machine)?;
        let code = Self::span(sec, name, sym.value, sym.size)?.to_vec();
        for rel in self.relocations.iter().filter(|r| r.target == sec.index) {
            let inside = rel.offset >= sym.value && rel.offset < sym.value + sym.size;
            let undefined = self.symbols.get(rel.symbol as usize).is_some_and(|s| s.shndx == SHN_UNDEF);
            if inside && undefined {
                return Err(ElfError::RelocationUnresolved {
                    function: name.into(),
                    section: sec.name.clone(),
                    offset: rel.offset,
                    symbol: self.symbol_name(rel.symbol),
                });
            }
        }
        Ok(ElfFunction { name: name.into(), size: code.len() as u64, code, machine: self.machine })
    }

    /// Loadable blob of a dynamic unit: the entry function must start its
    /// section, and the blob runs to the end of the section so that static
    /// helpers placed after it travel along. Any relocation in the span is
    /// rejected because a copied blob cannot be patched.
    pub fn extract_unit(&self, entry: &str, expected_machine: u16) -> Result<ElfFunction> {
        let (sym, sec) = self.locate(entry, expected_machine)?;
        if sym.value != 0 {
            return Err(ElfError::EntryNotAtSectionStart(entry.into()));
        }
        let code = Self::span(sec, entry, 0, sec.size)?.to_vec();
        if let Some(rel) = self.relocations.iter().find(|r| r.target == sec.index) {
            return Err(ElfError::RelocationUnresolved {
                function: entry.into(),
                section: sec.name.clone(),
                offset: rel.offset,
                symbol: self.symbol_name(rel.symbol),
            });
        }
        Ok(ElfFunction { name: entry.into(), size: code.len() as u64, code, machine: self.machine })
    }
}

pub fn machine_name(m: u16) -> &'static str {
    match m {
        EM_386 => "x86",
        EM_ARM => "arm",
        EM_X86_64 => "x86-64",
        EM_AARCH64 => "aarch64",
        EM_RISCV => "riscv",
        _ => "unknown",
    }
}
