//! Binary containers: `.mcol` for collections, `.msvd` for compressed
//! stores, plus a headered raw dump for single matrices.
//!
//! All numeric fields are little-endian; matrix payloads are column-major
//! IEEE-754 f64. Round trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::collection::{Block, Collection};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::store::{CompressedCluster, CompressedStore};

const MCOL_MAGIC: &[u8; 4] = b"MCOL";
const MSVD_MAGIC: &[u8; 4] = b"MSVD";
const FORMAT_VERSION: u32 = 1;

// Caps for header fields so corrupt files fail fast instead of allocating.
const MAX_ID_LEN: u32 = 1 << 20;
const MAX_COUNT: u64 = 1 << 32;

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_payload<W: Write>(w: &mut W, m: &Matrix) -> Result<()> {
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn write_id<W: Write>(w: &mut W, id: &str) -> Result<()> {
    let bytes = id.as_bytes();
    if bytes.len() as u64 > MAX_ID_LEN as u64 {
        return Err(Error::Format(format!("id `{id}` is too long")));
    }
    write_u32(w, bytes.len() as u32)?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format(format!("truncated payload while reading {what}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, what)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_count<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let v = read_u64(r, what)?;
    if v > MAX_COUNT {
        return Err(Error::Format(format!("unreasonable {what}: {v}")));
    }
    Ok(v as usize)
}

fn read_id<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r, "id length")?;
    if len > MAX_ID_LEN {
        return Err(Error::Format(format!("unreasonable id length {len}")));
    }
    let mut buf = vec![0u8; len as usize];
    read_exact(r, &mut buf, "id bytes")?;
    String::from_utf8(buf).map_err(|_| Error::Format("id is not valid UTF-8".into()))
}

fn read_matrix_payload<R: Read>(r: &mut R, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format(format!("{what} dimensions overflow")))?;
    let mut data = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        read_exact(r, &mut buf, what)?;
        data.push(f64::from_le_bytes(buf));
    }
    Matrix::from_column_major(rows, cols, data)
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4], what: &str) -> Result<()> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, "magic")?;
    if &buf != magic {
        return Err(Error::Format(format!(
            "bad magic for {what}: expected {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&buf)
        )));
    }
    let version = read_u32(r, "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported {what} version {version}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut buf = [0u8; 1];
    match r.read(&mut buf) {
        Ok(0) => Ok(()),
        Ok(_) => Err(Error::Format("trailing data after payload".into())),
        Err(e) => Err(Error::Io(e)),
    }
}

pub fn write_collection_to<W: Write>(coll: &Collection, w: &mut W) -> Result<()> {
    w.write_all(MCOL_MAGIC)?;
    write_u32(w, FORMAT_VERSION)?;
    write_u64(w, coll.m() as u64)?;
    write_u64(w, coll.len() as u64)?;
    for block in coll.blocks() {
        write_id(w, block.id())?;
        write_u64(w, block.cols() as u64)?;
    }
    for block in coll.blocks() {
        write_payload(w, block.matrix())?;
    }
    Ok(())
}

pub fn read_collection_from<R: Read>(r: &mut R) -> Result<Collection> {
    expect_magic(r, MCOL_MAGIC, "collection")?;
    let m = read_count(r, "row dimension")?;
    if m == 0 {
        return Err(Error::Format("collection row dimension is zero".into()));
    }
    let count = read_count(r, "block count")?;
    let mut headers = Vec::with_capacity(count);
    for _ in 0..count {
        let id = read_id(r)?;
        let cols = read_count(r, "block columns")?;
        headers.push((id, cols));
    }
    let mut coll = Collection::new(m)?;
    for (id, cols) in headers {
        let matrix = read_matrix_payload(r, m, cols, "block payload")?;
        coll.push(Block::new(id, matrix))?;
    }
    expect_eof(r)?;
    Ok(coll)
}

pub fn write_collection(coll: &Collection, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_collection_to(coll, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_collection(path: &Path) -> Result<Collection> {
    read_collection_from(&mut BufReader::new(File::open(path)?))
}

pub fn write_store_to<W: Write>(store: &CompressedStore, w: &mut W) -> Result<()> {
    w.write_all(MSVD_MAGIC)?;
    write_u32(w, FORMAT_VERSION)?;
    write_u64(w, store.m as u64)?;
    write_u64(w, store.clusters.len() as u64)?;
    for cluster in &store.clusters {
        write_id(w, &cluster.cluster_id)?;
        write_u64(w, cluster.rank as u64)?;
        write_u64(w, cluster.members.len() as u64)?;
        for (id, cols) in &cluster.members {
            write_id(w, id)?;
            write_u64(w, *cols as u64)?;
        }
    }
    for cluster in &store.clusters {
        write_payload(w, &cluster.u_tilde)?;
        write_payload(w, &cluster.v)?;
    }
    Ok(())
}

pub fn read_store_from<R: Read>(r: &mut R) -> Result<CompressedStore> {
    expect_magic(r, MSVD_MAGIC, "store")?;
    let m = read_count(r, "row dimension")?;
    if m == 0 {
        return Err(Error::Format("store row dimension is zero".into()));
    }
    let cluster_count = read_count(r, "cluster count")?;
    struct Header {
        id: String,
        rank: usize,
        members: Vec<(String, usize)>,
    }
    let mut headers = Vec::with_capacity(cluster_count);
    for _ in 0..cluster_count {
        let id = read_id(r)?;
        let rank = read_count(r, "cluster rank")?;
        let member_count = read_count(r, "member count")?;
        let mut members = Vec::with_capacity(member_count);
        for _ in 0..member_count {
            let member_id = read_id(r)?;
            let cols = read_count(r, "member columns")?;
            members.push((member_id, cols));
        }
        headers.push(Header { id, rank, members });
    }
    let mut clusters = Vec::with_capacity(cluster_count);
    for header in headers {
        let n_c: usize = header.members.iter().map(|(_, c)| c).sum();
        let u_tilde = read_matrix_payload(r, m, header.rank, "left factor payload")?;
        let v = read_matrix_payload(r, n_c, header.rank, "right factor payload")?;
        clusters.push(CompressedCluster {
            cluster_id: header.id,
            rank: header.rank,
            u_tilde,
            members: header.members,
            v,
        });
    }
    expect_eof(r)?;
    CompressedStore::new(m, clusters)
}

pub fn write_store(store: &CompressedStore, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_store_to(store, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_store(path: &Path) -> Result<CompressedStore> {
    read_store_from(&mut BufReader::new(File::open(path)?))
}

/// Raw matrix dump: rows u64 LE, cols u64 LE, then the column-major payload.
pub fn write_matrix(m: &Matrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_u64(&mut w, m.rows() as u64)?;
    write_u64(&mut w, m.cols() as u64)?;
    write_payload(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let mut r = BufReader::new(File::open(path)?);
    let rows = read_count(&mut r, "matrix rows")?;
    let cols = read_count(&mut r, "matrix cols")?;
    let m = read_matrix_payload(&mut r, rows, cols, "matrix payload")?;
    expect_eof(&mut r)?;
    Ok(m)
}

/// Serializes a collection to bytes; handy for byte-identity checks.
pub fn collection_to_bytes(coll: &Collection) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_collection_to(coll, &mut buf)?;
    Ok(buf)
}

pub fn store_to_bytes(store: &CompressedStore) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_store_to(store, &mut buf)?;
    Ok(buf)
}
