//! Just enough ELF to load bare-metal RISC-V images.
//!
//! Reads little-endian ELFCLASS32/64 files: PT_LOAD segments (file bytes
//! zero-padded to the memory size), the entry point, and the address of a
//! `tohost` symbol when a symbol table is present. Also assembles such
//! files, which is how the test programs in this repository are packaged
//! without an external toolchain.

use std::fmt;

use crate::platform::Segment;

const EM_RISCV: u16 = 243;
const PT_LOAD: u32 = 1;
const SHT_SYMTAB: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElfError {
    pub kind: &'static str,
    pub detail: String,
}

impl ElfError {
    fn new(kind: &'static str, detail: impl Into<String>) -> ElfError {
        ElfError { kind, detail: detail.into() }
    }
}

impl fmt::Display for ElfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

impl std::error::Error for ElfError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedImage {
    pub class64: bool,
    pub entry: u64,
    pub segments: Vec<Segment>,
    pub tohost: Option<u64>,
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn slice(&self, off: u64, len: u64) -> Result<&'a [u8], ElfError> {
        let end = off.checked_add(len).filter(|&e| e <= self.bytes.len() as u64);
        match end {
            Some(end) => Ok(&self.bytes[off as usize..end as usize]),
            None => Err(ElfError::new(
                "short-read",
                format!("need {len} bytes at offset {off}, file has {}", self.bytes.len()),
            )),
        }
    }

    fn u16(&self, off: u64) -> Result<u16, ElfError> {
        Ok(u16::from_le_bytes(self.slice(off, 2)?.try_into().unwrap()))
    }

    fn u32(&self, off: u64) -> Result<u32, ElfError> {
        Ok(u32::from_le_bytes(self.slice(off, 4)?.try_into().unwrap()))
    }

    fn u64(&self, off: u64) -> Result<u64, ElfError> {
        Ok(u64::from_le_bytes(self.slice(off, 8)?.try_into().unwrap()))
    }
}

pub fn parse_elf(bytes: &[u8]) -> Result<LoadedImage, ElfError> {
    let r = Reader { bytes };
    let ident = r.slice(0, 16)?;
    if ident[0..4] != [0x7f, b'E', b'L', b'F'] {
        return Err(ElfError::new("bad-magic", "not an ELF file"));
    }
    let class64 = match ident[4] {
        1 => false,
        2 => true,
        c => return Err(ElfError::new("bad-class", format!("EI_CLASS {c}"))),
    };
    if ident[5] != 1 {
        return Err(ElfError::new("not-little-endian", format!("EI_DATA {}", ident[5])));
    }
    let machine = r.u16(18)?;
    if machine != EM_RISCV {
        return Err(ElfError::new("not-riscv", format!("e_machine {machine}")));
    }

    let (entry, phoff, shoff) = if class64 {
        (r.u64(24)?, r.u64(32)?, r.u64(40)?)
    } else {
        (r.u32(24)? as u64, r.u32(28)? as u64, r.u32(32)? as u64)
    };
    let (phentsize, phnum, shentsize, shnum) = if class64 {
        (r.u16(54)?, r.u16(56)?, r.u16(58)?, r.u16(60)?)
    } else {
        (r.u16(42)?, r.u16(44)?, r.u16(46)?, r.u16(48)?)
    };
    let min_phent = if class64 { 56 } else { 32 };
    if phnum > 0 {
        if (phentsize as u64) < min_phent {
            return Err(ElfError::new("bad-header", format!("phentsize {phentsize}")));
        }
        r.slice(phoff, phnum as u64 * phentsize as u64)?;
    }

    let mut segments = Vec::new();
    for i in 0..phnum as u64 {
        let p = phoff + i * phentsize as u64;
        if r.u32(p)? != PT_LOAD {
            continue;
        }
        let (offset, paddr, filesz, memsz) = if class64 {
            (r.u64(p + 8)?, r.u64(p + 24)?, r.u64(p + 32)?, r.u64(p + 40)?)
        } else {
            (
                r.u32(p + 4)? as u64,
                r.u32(p + 12)? as u64,
                r.u32(p + 16)? as u64,
                r.u32(p + 20)? as u64,
            )
        };
        if memsz < filesz {
            return Err(ElfError::new(
                "bad-header",
                format!("segment {i}: memsz {memsz} < filesz {filesz}"),
            ));
        }
        if memsz == 0 {
            continue;
        }
        let mut data = r.slice(offset, filesz)?.to_vec();
        data.resize(memsz as usize, 0);
        segments.push(Segment { addr: paddr, bytes: data });
    }

    let tohost = find_symbol(&r, class64, shoff, shentsize, shnum, b"tohost")?;
    Ok(LoadedImage { class64, entry, segments, tohost })
}

fn find_symbol(
    r: &Reader<'_>,
    class64: bool,
    shoff: u64,
    shentsize: u16,
    shnum: u16,
    name: &[u8],
) -> Result<Option<u64>, ElfError> {
    if shoff == 0 || shnum == 0 {
        return Ok(None);
    }
    let min_shent = if class64 { 64 } else { 40 };
    if (shentsize as u64) < min_shent {
        return Err(ElfError::new("bad-header", format!("shentsize {shentsize}")));
    }
    r.slice(shoff, shnum as u64 * shentsize as u64)?;
    let sh = |idx: u64| shoff + idx * shentsize as u64;
    for i in 0..shnum as u64 {
        let s = sh(i);
        if r.u32(s + 4)? != SHT_SYMTAB {
            continue;
        }
        let (sym_off, sym_size, link, sym_entsize) = if class64 {
            (r.u64(s + 24)?, r.u64(s + 32)?, r.u32(s + 40)?, r.u64(s + 56)?)
        } else {
            (r.u32(s + 16)? as u64, r.u32(s + 20)? as u64, r.u32(s + 24)?, r.u32(s + 36)? as u64)
        };
        if link as u64 >= shnum as u64 {
            return Err(ElfError::new("bad-header", format!("symtab link {link}")));
        }
        let strtab = sh(link as u64);
        let (str_off, str_size) = if class64 {
            (r.u64(strtab + 24)?, r.u64(strtab + 32)?)
        } else {
            (r.u32(strtab + 16)? as u64, r.u32(strtab + 20)? as u64)
        };
        let names = r.slice(str_off, str_size)?;
        let min_sym = if class64 { 24u64 } else { 16 };
        if sym_entsize < min_sym {
            return Err(ElfError::new("bad-header", format!("sym entsize {sym_entsize}")));
        }
        r.slice(sym_off, sym_size)?;
        let count = sym_size / sym_entsize;
        for j in 0..count {
            let sym = sym_off + j * sym_entsize;
            let st_name = r.u32(sym)? as usize;
            let value = if class64 { r.u64(sym + 8)? } else { r.u32(sym + 4)? as u64 };
            if st_name >= names.len() {
                continue;
            }
            let end = names[st_name..].iter().position(|&b| b == 0).map(|p| st_name + p);
            if let Some(end) = end {
                if &names[st_name..end] == name {
                    return Ok(Some(value));
                }
            }
        }
    }
    Ok(None)
}

fn push_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_word(out: &mut Vec<u8>, class64: bool, v: u64) {
    if class64 {
        push_u64(out, v);
    } else {
        push_u32(out, v as u32);
    }
}

/// Assembles a minimal executable ELF image from segments, with an
/// optional symbol table holding just `tohost`.
pub fn build_elf(
    class64: bool,
    entry: u64,
    segments: &[Segment],
    tohost: Option<u64>,
) -> Vec<u8> {
    let ehsize: u64 = if class64 { 64 } else { 52 };
    let phentsize: u64 = if class64 { 56 } else { 32 };
    let shentsize: u64 = if class64 { 64 } else { 40 };
    let symsize: u64 = if class64 { 24 } else { 16 };
    let phnum = segments.len() as u64;
    let shnum: u64 = if tohost.is_some() { 3 } else { 0 };

    let mut seg_offsets = Vec::new();
    let mut cursor = ehsize + phnum * phentsize;
    for seg in segments {
        seg_offsets.push(cursor);
        cursor += seg.bytes.len() as u64;
    }
    let strtab: &[u8] = b"\0tohost\0";
    let sym_off = cursor;
    let str_off = sym_off + 2 * symsize;
    let shoff = if tohost.is_some() { str_off + strtab.len() as u64 } else { 0 };

    let mut out = Vec::new();
    out.extend_from_slice(&[0x7f, b'E', b'L', b'F']);
    out.push(if class64 { 2 } else { 1 });
    out.push(1); // little-endian
    out.push(1); // EV_CURRENT
    out.extend_from_slice(&[0; 9]);
    push_u16(&mut out, 2); // ET_EXEC
    push_u16(&mut out, EM_RISCV);
    push_u32(&mut out, 1);
    push_word(&mut out, class64, entry);
    push_word(&mut out, class64, ehsize); // phoff: right after the header
    push_word(&mut out, class64, shoff);
    push_u32(&mut out, 0); // flags
    push_u16(&mut out, ehsize as u16);
    push_u16(&mut out, phentsize as u16);
    push_u16(&mut out, phnum as u16);
    push_u16(&mut out, shentsize as u16);
    push_u16(&mut out, shnum as u16);
    push_u16(&mut out, 0); // shstrndx: no section names

    for (seg, &off) in segments.iter().zip(&seg_offsets) {
        let len = seg.bytes.len() as u64;
        push_u32(&mut out, PT_LOAD);
        if class64 {
            push_u32(&mut out, 7); // flags rwx
            push_u64(&mut out, off);
            push_u64(&mut out, seg.addr); // vaddr
            push_u64(&mut out, seg.addr); // paddr
            push_u64(&mut out, len);
            push_u64(&mut out, len);
            push_u64(&mut out, 4);
        } else {
            push_u32(&mut out, off as u32);
            push_u32(&mut out, seg.addr as u32);
            push_u32(&mut out, seg.addr as u32);
            push_u32(&mut out, len as u32);
            push_u32(&mut out, len as u32);
            push_u32(&mut out, 7);
            push_u32(&mut out, 4);
        }
    }
    for seg in segments {
        out.extend_from_slice(&seg.bytes);
    }

    if let Some(tohost_addr) = tohost {
        // Null symbol, then tohost (st_name 1 points into the strtab).
        let mut push_sym = |name: u32, value: u64| {
            push_u32(&mut out, name);
            if class64 {
                out.push(0);
                out.push(0);
                push_u16(&mut out, 0);
                push_u64(&mut out, value);
                push_u64(&mut out, 0);
            } else {
                push_u32(&mut out, value as u32);
                push_u32(&mut out, 0);
                out.push(0);
                out.push(0);
                push_u16(&mut out, 0);
            }
        };
        push_sym(0, 0);
        push_sym(1, tohost_addr);
        out.extend_from_slice(strtab);

        // Section headers: null, symtab, strtab.
        let mut push_shdr = |sh_type: u32, off: u64, size: u64, link: u32, entsize: u64| {
            push_u32(&mut out, 0); // sh_name
            push_u32(&mut out, sh_type);
            push_word(&mut out, class64, 0); // flags
            push_word(&mut out, class64, 0); // addr
            push_word(&mut out, class64, off);
            push_word(&mut out, class64, size);
            push_u32(&mut out, link);
            push_u32(&mut out, 0); // info
            push_word(&mut out, class64, 0); // addralign
            push_word(&mut out, class64, entsize);
        };
        push_shdr(0, 0, 0, 0, 0);
        push_shdr(SHT_SYMTAB, sym_off, 2 * symsize, 2, symsize);
        push_shdr(3, str_off, strtab.len() as u64, 0, 0); // SHT_STRTAB
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(addr: u64, bytes: &[u8]) -> Segment {
        Segment { addr, bytes: bytes.to_vec() }
    }

    #[test]
    fn build_parse_round_trip_64() {
        let segs = vec![seg(0x8000_0000, &[0x13, 0, 0, 0]), seg(0x8000_1000, &[1, 2, 3])];
        let bytes = build_elf(true, 0x8000_0000, &segs, Some(0x8000_1000));
        let img = parse_elf(&bytes).unwrap();
        assert!(img.class64);
        assert_eq!(img.entry, 0x8000_0000);
        assert_eq!(img.segments, segs);
        assert_eq!(img.tohost, Some(0x8000_1000));
    }

    #[test]
    fn build_parse_round_trip_32() {
        let segs = vec![seg(0x8000_0000, &[0x13, 0, 0, 0])];
        let bytes = build_elf(false, 0x8000_0000, &segs, None);
        let img = parse_elf(&bytes).unwrap();
        assert!(!img.class64);
        assert_eq!(img.entry, 0x8000_0000);
        assert_eq!(img.segments, segs);
        assert_eq!(img.tohost, None);
    }

    #[test]
    fn truncated_file() {
        let bytes = build_elf(true, 0, &[seg(0x8000_0000, &[1, 2, 3, 4])], None);
        let err = parse_elf(&bytes[..20]).unwrap_err();
        assert_eq!(err.kind, "short-read");
        let err = parse_elf(&[0x7f]).unwrap_err();
        assert_eq!(err.kind, "short-read");
    }

    #[test]
    fn wrong_magic_class_machine_endianness() {
        let good = build_elf(true, 0, &[], None);

        let mut bad = good.clone();
        bad[0] = 0x7e;
        assert_eq!(parse_elf(&bad).unwrap_err().kind, "bad-magic");

        let mut bad = good.clone();
        bad[4] = 3;
        assert_eq!(parse_elf(&bad).unwrap_err().kind, "bad-class");

        let mut bad = good.clone();
        bad[5] = 2;
        assert_eq!(parse_elf(&bad).unwrap_err().kind, "not-little-endian");

        let mut bad = good.clone();
        bad[18] = 62; // EM_X86_64
        bad[19] = 0;
        assert_eq!(parse_elf(&bad).unwrap_err().kind, "not-riscv");
    }

    #[test]
    fn malformed_offsets_do_not_crash() {
        let mut bytes = build_elf(true, 0, &[seg(0x8000_0000, &[1, 2, 3, 4])], None);
        // Point phoff past the end of the file.
        bytes[32..40].copy_from_slice(&u64::MAX.to_le_bytes());
        assert_eq!(parse_elf(&bytes).unwrap_err().kind, "short-read");
    }
}
