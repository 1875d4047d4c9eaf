export interface SegmentView {
  id: string;
  kind: string;
  text: string;
  page: number | null;
  order: number;
}

export interface ReportView {
  doc_id: string;
  status: string;
  language: string;
  segments: SegmentView[];
}

export interface ReportSummary {
  doc_id: string;
  status: string;
  n_segments: number;
}

export interface RecommendationItem {
  segment_id: string;
  score: number;
  text: string;
  page: number | null;
  order: number;
}

export interface RecommendationResponse {
  doc_id: string;
  req_id: string;
  k: number;
  items: RecommendationItem[];
}

export interface RequirementView {
  req_id: string;
  title: string;
  description: string;
}

export interface CategoryGroup {
  category: string;
  requirements: RequirementView[];
}

export interface CatalogResponse {
  name: string;
  categories: CategoryGroup[];
}

export type Verdict = "relevant" | "irrelevant";

export interface FeedbackRequest {
  doc_id: string;
  req_id: string;
  segment_id: string;
  verdict: Verdict;
  client?: string;
}

export interface UploadResponse {
  doc_id: string;
  status: string;
}
