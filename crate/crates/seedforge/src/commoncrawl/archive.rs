//! Byte-range access to crawl archives, over HTTP or from local fixture
//! files.

use super::{CommonCrawlError, CrawlRecordRef};
use crate::budget::Budget;
use crate::fetch::FetchClient;
use std::io::{Read, Seek, SeekFrom};

pub struct ArchiveFetcher {
    archive_base: String,
}

impl ArchiveFetcher {
    /// `archive_base` is joined with each record's archive path. An
    /// `http(s)://` base uses Range requests; a `file://` base reads the
    /// slice from disk.
    pub fn new(archive_base: &str) -> Self {
        ArchiveFetcher {
            archive_base: archive_base.trim_end_matches('/').to_string(),
        }
    }

    pub fn fetch_raw(
        &self,
        record: &CrawlRecordRef,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<u8>, CommonCrawlError> {
        let location = format!(
            "{}/{}",
            self.archive_base,
            record.archive_path.trim_start_matches('/')
        );
        if let Some(path) = location.strip_prefix("file://") {
            return read_file_slice(path, record.byte_offset, record.record_length);
        }
        let resp = http.get_range(&location, budget, record.byte_offset, record.record_length)?;
        if resp.status != 206 {
            return Err(CommonCrawlError::RangeUnsupported {
                url: location,
                status: resp.status,
            });
        }
        Ok(resp.bytes)
    }
}

fn read_file_slice(path: &str, offset: u64, length: u64) -> Result<Vec<u8>, CommonCrawlError> {
    let mut file = std::fs::File::open(path).map_err(|source| CommonCrawlError::Archive {
        path: path.to_string(),
        source,
    })?;
    file.seek(SeekFrom::Start(offset))
        .map_err(|source| CommonCrawlError::Archive {
            path: path.to_string(),
            source,
        })?;
    let mut buf = Vec::with_capacity(length as usize);
    file.take(length)
        .read_to_end(&mut buf)
        .map_err(|source| CommonCrawlError::Archive {
            path: path.to_string(),
            source,
        })?;
    Ok(buf)
}
