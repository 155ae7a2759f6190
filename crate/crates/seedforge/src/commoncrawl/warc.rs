//! Minimal WARC record handling: decode one gzip-compressed record into its
//! payload (stripping WARC and inner HTTP headers), and the encoding
//! counterpart used to build fixture archives.

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WarcError {
    #[error("gzip: {0}")]
    Gzip(std::io::Error),
    #[error("corrupt record: {0}")]
    Corrupt(&'static str),
}

/// A decoded record: the WARC target URI (when present) and the payload with
/// all protocol headers removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarcPayload {
    pub target_uri: Option<String>,
    pub payload: Vec<u8>,
}

/// Decodes one gzip member holding one WARC record. `max_decompressed`
/// bounds decompression so a pathological record cannot balloon memory;
/// exceeding it is reported as corrupt ("decompressed too large").
pub fn parse_record(compressed: &[u8], max_decompressed: u64) -> Result<WarcPayload, WarcError> {
    let mut decoder = GzDecoder::new(compressed).take(max_decompressed + 1);
    let mut raw = Vec::new();
    decoder.read_to_end(&mut raw).map_err(WarcError::Gzip)?;
    if raw.len() as u64 > max_decompressed {
        return Err(WarcError::Corrupt("decompressed record too large"));
    }
    if !raw.starts_with(b"WARC/") {
        return Err(WarcError::Corrupt("missing WARC/ version line"));
    }
    let header_end = find_blank_line(&raw).ok_or(WarcError::Corrupt("unterminated WARC header"))?;
    let headers = String::from_utf8_lossy(&raw[..header_end]);
    let mut content_length: Option<usize> = None;
    let mut target_uri = None;
    for line in headers.lines().skip(1) {
        let Some((name, value)) = line.split_once(':') else { continue };
        match name.trim().to_ascii_lowercase().as_str() {
            "content-length" => content_length = value.trim().parse().ok(),
            "warc-target-uri" => target_uri = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let block_start = header_end + 4;
    let block_end = match content_length {
        Some(len) => {
            let end = block_start + len;
            if end > raw.len() {
                return Err(WarcError::Corrupt("block shorter than Content-Length"));
            }
            end
        }
        None => raw.len(),
    };
    let block = &raw[block_start..block_end];

    // response records wrap the payload in an HTTP message
    let payload = if block.starts_with(b"HTTP/") {
        let http_end =
            find_blank_line(block).ok_or(WarcError::Corrupt("unterminated HTTP header"))?;
        block[http_end + 4..].to_vec()
    } else {
        block.to_vec()
    };
    Ok(WarcPayload { target_uri, payload })
}

fn find_blank_line(data: &[u8]) -> Option<usize> {
    data.windows(4).position(|w| w == b"\r\n\r\n")
}

/// Encodes `payload` as one gzip-compressed WARC response record, the shape
/// [`parse_record`] consumes. Used to build fixture archives.
pub fn build_response_record(target_uri: &str, content_type: &str, payload: &[u8]) -> Vec<u8> {
    let http = format!(
        "HTTP/1.1 200 OK\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\r\n",
        payload.len()
    );
    let mut block = http.into_bytes();
    block.extend_from_slice(payload);
    let warc = format!(
        "WARC/1.0\r\nWARC-Type: response\r\nWARC-Target-URI: {target_uri}\r\nContent-Type: application/http; msgtype=response\r\nContent-Length: {}\r\n\r\n",
        block.len()
    );
    let mut record = warc.into_bytes();
    record.extend_from_slice(&block);
    record.extend_from_slice(b"\r\n\r\n");

    let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
    encoder.write_all(&record).expect("in-memory gzip write");
    encoder.finish().expect("in-memory gzip finish")
}
