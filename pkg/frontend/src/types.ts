// Payload shapes of the four backend endpoints.

export interface SearchResult {
  segment_id: string;
  media_url: string;
  offset_s: number;
  predicted_class: string;
  confidence: number;
  title: string;
  thumbnail_url: string | null;
  correct_votes: number;
  incorrect_votes: number;
}

export interface SearchResponse {
  query: string;
  matched_class: string | null;
  similarity: number | null;
  status: string;
  results: SearchResult[];
}

export interface FeedbackResponse {
  segment_id: string;
  correct_votes: number;
  incorrect_votes: number;
}

export interface ClassifySegment {
  offset_s: number;
  label: string;
  confidence: number;
}

export interface ClassifyResponse {
  url: string;
  dominant_class: string;
  segments: ClassifySegment[];
}

export interface StatsResponse {
  segment_count: number;
  hours_indexed: number;
  per_class_counts: Record<string, number>;
  feedback_count: number;
}

export type Verdict = 'correct' | 'incorrect';
