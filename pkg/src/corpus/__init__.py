from src.corpus.documents import (
    Document,
    DocumentBatch,
    ReviewIndex,
    assemble_document,
    document_length,
    load_documents,
    save_documents,
)
from src.corpus.records import (
    CorpusError,
    DatasetFormatError,
    ParsedReviews,
    ReviewRecord,
    corpus_statistics,
    filter_k_core,
    parse_dataset,
    parse_lines,
    read_records,
    read_reviews,
    split_dataset,
    write_records,
)
from src.corpus.vocabulary import (
    DELIM,
    DELIM_ID,
    PAD,
    PAD_ID,
    UNK,
    UNK_ID,
    Vocabulary,
    build_vocab,
    tokenize,
)
